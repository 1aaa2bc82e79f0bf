// hubopt: validate, run, sweep and report Power-to-X hub cases.
//
// Exit codes: 0 success, 1 invalid input or non-optimal case, 2 missing files or I/O failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "hubopt/catalog.hpp"
#include "hubopt/lpform.hpp"
#include "hubopt/market.hpp"
#include "hubopt/results.hpp"
#include "hubopt/sweep.hpp"

namespace fs = std::filesystem;
using namespace hubopt;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kIo = 2;

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << text;
  if (!out) throw IoFailure("write failed for " + path.string());
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

const char* const kMarketFiles[] = {MarketFiles::spot, MarketFiles::ng,   MarketFiles::emission, MarketFiles::dk1,
                                    MarketFiles::dh,   MarketFiles::wind, MarketFiles::solar};

std::vector<std::string> missing_market_files(const std::string& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return {dir};
  for (const char* name : kMarketFiles)
    if (!fs::is_regular_file(fs::path(dir) / name)) out.push_back((fs::path(dir) / name).string());
  return out;
}

ScenarioConfig read_config(const std::string& path) {
  if (!fs::is_regular_file(path)) throw IoFailure("config not found: " + path);
  return load_config(path);
}

Catalog read_catalog(const std::string& path) {
  const std::string p = path.empty() ? default_catalog_path() : path;
  if (!fs::is_regular_file(p)) throw IoFailure("catalog not found: " + p);
  return load_catalog(p);
}

std::string solver_identity(const RunOptions& run, const ScenarioConfig& config) {
  const std::string name = run.solver.empty() ? config.solver : run.solver;
  if (name == "reference") return "reference (bounded dual simplex)";
  std::string command = run.backend.command.empty() ? default_backend_command() : run.backend.command;
  if (const char* env = std::getenv("HUBOPT_LP_BACKEND"); env != nullptr && *env != '\0') command = env;
  return "external: " + command;
}

nlohmann::json provenance(const ScenarioConfig& config, const Catalog& catalog, const std::string& catalog_path,
                          const RunOptions& run) {
  nlohmann::json p;
  p["config_hash"] = hash_hex(config_hash(config));
  p["catalog_path"] = catalog_path;
  p["catalog_version"] = catalog.version;
  p["catalog_hash"] = hash_hex(fnv1a(read_file(catalog_path)));
  const std::string dir = market_dir(config);
  p["data_dir"] = dir;
  nlohmann::json files = nlohmann::json::object();
  for (const char* name : kMarketFiles) files[name] = hash_hex(fnv1a(read_file(fs::path(dir) / name)));
  p["data_files"] = files;
  p["solver"] = solver_identity(run, config);
  return p;
}

void print_list(const char* title, const std::vector<std::string>& items) {
  if (items.empty()) return;
  fmt::print("{}:\n", title);
  for (const auto& s : items) fmt::print("  - {}\n", s);
}

// €/MWh to €/kg for hydrogen, €/t for methanol.
std::string summary_text(const CaseResult& r, const Catalog& catalog) {
  std::string s;
  s += fmt::format("case: {}\n", r.name);
  s += fmt::format("status: {}\n", to_string(r.solver.status));
  if (!r.error.empty()) s += fmt::format("error: {}\n", r.error);
  s += fmt::format("solver: {} ({} rows, {} columns, {:.2f} s)\n", r.solver.solver, r.solver.rows, r.solver.columns,
                   r.solver.wall_seconds);
  if (!r.optimal()) return s;
  s += fmt::format("kkt: {}\n", r.solver.kkt_passed ? "passed" : "FAILED");
  if (r.lcoh)
    s += fmt::format("LCOH: {:.2f} EUR/MWh ({:.3f} EUR/kg)\n", *r.lcoh,
                     *r.lcoh * catalog.constant("h2_lhv_mwh_per_t") / 1000.0);
  if (r.lcom)
    s += fmt::format("LCOM: {:.2f} EUR/MWh ({:.1f} EUR/t)\n", *r.lcom,
                     *r.lcom * catalog.constant("meoh_lhv_mwh_per_t"));
  s += fmt::format("total annual cost: {:.0f} EUR\n", r.breakdown.total);
  s += fmt::format("external trade: {:.0f} EUR\n", r.breakdown.external_trade);
  s += fmt::format("cost recovery residual: {:.3e} (relative {:.3e})\n", r.audit.residual, r.audit.relative_residual);
  s += "capacities:\n";
  for (const auto& [name, cap] : r.capacities) {
    auto g = r.groups.find(name);
    if (g != r.groups.end() && (g->second == "external" || g->second == "sink")) continue;
    if (std::abs(cap) < 1e-6) continue;
    s += fmt::format("  {:<28} {:>14.3f}\n", name, cap);
  }
  s += "mean shadow prices:\n";
  for (const auto& p : r.prices) s += fmt::format("  {:<28} {:>10.2f}\n", p.bus, p.mean);
  for (const auto& w : r.warnings) s += "warning: " + w + "\n";
  return s;
}

int status_code(const CaseResult& r) {
  if (r.optimal()) return kOk;
  return kInvalid;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& config_path, const std::string& catalog_path) {
  const ScenarioConfig config = read_config(config_path);
  const Catalog catalog = read_catalog(catalog_path);
  fmt::print("config: {} (hash {})\n", config.name, hash_hex(config_hash(config)));
  fmt::print("catalog: {} version {}\n", catalog.schema, catalog.version);

  const auto errors = validate_config(config);
  print_list("errors", errors);
  print_list("warnings", config_warnings(config));

  const std::string dir = market_dir(config);
  if (auto missing = missing_market_files(dir); !missing.empty()) {
    print_list("missing data files", missing);
    return kIo;
  }
  if (!errors.empty()) return kInvalid;

  MarketSeries market;
  try {
    market = load_case_market(config);
  } catch (const InputError& e) {
    fmt::print("market data: {}\n", e.what());
    return kInvalid;
  }
  if (auto problems = market.check(); !problems.empty()) {
    print_list("market data", problems);
    return kInvalid;
  }
  double spot_mean = 0.0;
  std::size_t rfnbo_hours = 0;
  for (double p : market.spot) spot_mean += p;
  for (double m : rfnbo_mask(market.spot)) rfnbo_hours += m > 0.5 ? 1 : 0;
  spot_mean /= std::max<std::size_t>(1, market.spot.size());
  fmt::print("market: {} ({} snapshots, mean spot {:.2f} EUR/MWh, {} hours eligible for grid RFNBO)\n", dir,
             market.spot.size(), spot_mean, rfnbo_hours);
  if (market.tariffs.placeholder) fmt::print("note: grid tariffs and NG emission factor are placeholders\n");
  fmt::print("alpha_H2: {:.6f}\n", alpha_h2(catalog));
  fmt::print("alpha_MeOH: {:.6f} ({})\n", alpha_meoh(catalog), alpha_meoh_derivation(catalog));
  fmt::print("MeOH demand: {:.1f} MWh/y\n", meoh_demand(config.biomethane_output, config.co2_recovery_ratio, catalog));
  fmt::print("ok\n");
  return kOk;
}

int cmd_run(const std::string& config_path, const std::string& catalog_arg, const std::string& solver,
            const std::string& out, bool force) {
  const ScenarioConfig config = read_config(config_path);
  const std::string catalog_path = catalog_arg.empty() ? default_catalog_path() : catalog_arg;
  const Catalog catalog = read_catalog(catalog_path);
  if (auto errors = validate_config(config); !errors.empty()) {
    print_list("errors", errors);
    return kInvalid;
  }
  if (!solver.empty() && solver != "external" && solver != "reference") {
    fmt::print(stderr, "unknown solver '{}'\n", solver);
    return kInvalid;
  }
  if (auto missing = missing_market_files(market_dir(config)); !missing.empty()) {
    print_list("missing data files", missing);
    return kIo;
  }
  const fs::path out_dir = out.empty() ? fs::path("results") / config.name : fs::path(out);
  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
    fmt::print(stderr, "output directory {} is not empty; use --force to overwrite\n", out_dir.string());
    return kInvalid;
  }
  fs::create_directories(out_dir);

  RunOptions run;
  run.solver = solver;
  const nlohmann::json prov = provenance(config, catalog, catalog_path, run);
  fmt::print("config hash {}, catalog {}, solver {}\n", prov["config_hash"].get<std::string>(),
             catalog.version, prov["solver"].get<std::string>());

  const auto start = std::chrono::steady_clock::now();
  const CaseResult result = run_case(config, catalog, run);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_case_result(out_dir.string(), result);
  write_file(out_dir / SweepFiles::config, to_json(config).dump(2) + "\n");
  nlohmann::json p = prov;
  p["wall_seconds"] = seconds;
  write_file(out_dir / "provenance.json", p.dump(2) + "\n");
  const std::string summary = summary_text(result, catalog);
  write_file(out_dir / "summary.txt", summary);
  fmt::print("{}", summary);
  fmt::print("results written to {}\n", out_dir.string());
  return status_code(result);
}

int cmd_sweep(const std::string& spec_path, const std::string& catalog_arg, int jobs, const std::string& out,
              const std::string& solver) {
  if (!fs::is_regular_file(spec_path)) throw IoFailure("sweep spec not found: " + spec_path);
  SweepSpec spec = load_sweep_spec(spec_path);
  if (jobs > 0) spec.jobs = jobs;
  if (!out.empty()) spec.output_dir = out;
  if (!solver.empty()) spec.run.solver = solver;
  const Catalog catalog = read_catalog(catalog_arg);

  // Fail fast on configurations that cannot run at all.
  std::size_t invalid = 0;
  const auto cases = enumerate_cases(spec.base, spec.grid);
  for (const auto& c : cases) {
    if (auto errors = validate_config(c); !errors.empty()) {
      ++invalid;
      fmt::print("{}: {}\n", case_label(c), errors.front());
    }
    if (auto missing = missing_market_files(market_dir(c)); !missing.empty()) {
      print_list("missing data files", missing);
      return kIo;
    }
  }
  if (invalid > 0) return kInvalid;

  fmt::print("sweep: {} cases, {} jobs, output {}\n", cases.size(), spec.jobs, spec.output_dir);
  const SweepSummary summary = run_sweep(spec, catalog, [](const SweepCase& c, std::size_t done, std::size_t total) {
    std::string status = c.resumed ? "resumed" : to_string(c.result.solver.status);
    if (!c.result.error.empty()) status = "error: " + c.result.error;
    std::string tail;
    if (c.result.lcoh) tail += fmt::format(" LCOH {:.2f}", *c.result.lcoh);
    if (c.result.lcom) tail += fmt::format(" LCOM {:.2f}", *c.result.lcom);
    fmt::print("[{}/{}] {} {}{}\n", done, total, case_label(c.config), status, tail);
    std::fflush(stdout);
  });
  fmt::print("completed {}, resumed {}, failed {}\n", summary.completed, summary.resumed, summary.failed);
  return summary.failed == 0 ? kOk : kInvalid;
}

int cmd_report(const std::string& dir, const std::string& out, const std::string& scenario, int year) {
  if (!fs::is_directory(dir)) throw IoFailure("results directory not found: " + dir);
  const auto results = load_sweep_results(dir);
  if (results.empty()) {
    fmt::print(stderr, "no case results under {}\n", dir);
    return kInvalid;
  }
  AggregateFilter filter;
  if (!scenario.empty()) filter.scenario = scenario_from_string(scenario);
  if (year != 0) filter.price_year = year;
  const AggregateTables t = aggregate(results, filter);
  if (t.cases == 0) {
    fmt::print(stderr, "no cases match the filter\n");
    return kInvalid;
  }
  const fs::path target = out.empty() ? fs::path(dir) : fs::path(out);
  fs::create_directories(target);
  write_file(target / "aggregate_long.csv", t.long_csv);
  write_file(target / "correlations.csv", t.correlation_csv);
  write_file(target / "cost_vs_recovery.csv", t.recovery_csv);
  write_file(target / "cost_vs_recovery.gp", recovery_gnuplot("cost_vs_recovery.csv"));
  fmt::print("{} cases, {} rows written to {}\n", t.cases, t.rows, target.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-to-X hub optimizer"};
  app.require_subcommand(1);
  std::string catalog;
  app.add_option("--catalog", catalog, "technology catalog JSON (default: shipped catalog)");

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "check a case configuration and its input data");
  validate->add_option("config", config_path, "case configuration JSON")->required();

  std::string solver, out;
  bool force = false;
  auto* run = app.add_subcommand("run", "solve one case");
  run->add_option("config", config_path, "case configuration JSON")->required();
  run->add_option("--solver", solver, "external or reference (default: from config)");
  run->add_option("--out", out, "output directory (default: results/<name>)");
  run->add_flag("--force", force, "overwrite a non-empty output directory");

  std::string spec_path;
  int jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "run a sensitivity sweep");
  sweep->add_option("spec", spec_path, "sweep specification JSON")->required();
  sweep->add_option("--jobs", jobs, "parallel cases (default: from spec)")->check(CLI::NonNegativeNumber);
  sweep->add_option("--out", out, "output directory (default: from spec)");
  sweep->add_option("--solver", solver, "external or reference");

  std::string results_dir, scenario;
  int year = 0;
  auto* report = app.add_subcommand("report", "aggregate sweep results");
  report->add_option("results", results_dir, "sweep output directory")->required();
  report->add_option("--out", out, "report directory (default: the results directory)");
  report->add_option("--scenario", scenario, "keep only this scenario");
  report->add_option("--year", year, "keep only this price year");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(config_path, catalog);
    if (*run) return cmd_run(config_path, catalog, solver, out, force);
    if (*sweep) return cmd_sweep(spec_path, catalog, jobs, out, solver);
    if (*report) return cmd_report(results_dir, out, scenario, year);
  } catch (const IoFailure& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIo;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIo;
  } catch (const InputError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInvalid;
  }
  return kOk;
}
