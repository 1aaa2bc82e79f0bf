#include "hubopt/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace hubopt {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// grid

std::size_t GridSpec::size() const {
  return scenarios.size() * co2_tax.size() * co2_recovery_ratio.size() * max_re.size() * price_year.size() *
         dh_enabled.size() * biochar_enabled.size();
}

GridSpec reference_slice() {
  GridSpec g;
  g.co2_tax = {150.0};
  g.co2_recovery_ratio = {0.9};
  g.max_re = {0.5};
  g.dh_enabled = {false};
  g.biochar_enabled = {false};
  return g;
}

json to_json(const GridSpec& g) {
  std::vector<std::string> scenarios;
  for (auto s : g.scenarios) scenarios.push_back(to_string(s));
  return {{"scenarios", scenarios},
          {"co2_tax", g.co2_tax},
          {"co2_recovery_ratio", g.co2_recovery_ratio},
          {"max_re", g.max_re},
          {"price_year", g.price_year},
          {"dh_enabled", g.dh_enabled},
          {"biochar_enabled", g.biochar_enabled}};
}

GridSpec grid_from_json(const json& doc) {
  static const std::set<std::string> known{"scenarios", "co2_tax",    "co2_recovery_ratio", "max_re",
                                           "price_year", "dh_enabled", "biochar_enabled"};
  if (!doc.is_object()) throw InputError("grid must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!known.count(it.key())) throw InputError("grid: unknown key '" + it.key() + "'");
  GridSpec g;
  try {
    if (doc.contains("scenarios")) {
      g.scenarios.clear();
      for (const auto& s : doc["scenarios"]) g.scenarios.push_back(scenario_from_string(s.get<std::string>()));
    }
    g.co2_tax = doc.value("co2_tax", g.co2_tax);
    g.co2_recovery_ratio = doc.value("co2_recovery_ratio", g.co2_recovery_ratio);
    g.max_re = doc.value("max_re", g.max_re);
    g.price_year = doc.value("price_year", g.price_year);
    g.dh_enabled = doc.value("dh_enabled", g.dh_enabled);
    g.biochar_enabled = doc.value("biochar_enabled", g.biochar_enabled);
  } catch (const json::exception& e) {
    throw InputError(std::string("grid: ") + e.what());
  }
  return g;
}

std::string case_label(const ScenarioConfig& c) {
  return fmt::format("{}-{}-tax{:g}-rec{:.2f}-re{:g}-dh{:d}-bc{:d}", to_string(c.scenario), c.price_year, c.co2_tax,
                     c.co2_recovery_ratio, c.max_re, c.dh_enabled, c.biochar_enabled);
}

std::vector<ScenarioConfig> enumerate_cases(const ScenarioConfig& base, const GridSpec& g) {
  auto nonempty = [](std::size_t n, const char* what) {
    if (n == 0) throw InputError(fmt::format("grid: '{}' has no values", what));
  };
  nonempty(g.scenarios.size(), "scenarios");
  nonempty(g.co2_tax.size(), "co2_tax");
  nonempty(g.co2_recovery_ratio.size(), "co2_recovery_ratio");
  nonempty(g.max_re.size(), "max_re");
  nonempty(g.price_year.size(), "price_year");
  nonempty(g.dh_enabled.size(), "dh_enabled");
  nonempty(g.biochar_enabled.size(), "biochar_enabled");

  std::vector<ScenarioConfig> out;
  out.reserve(g.size());
  for (auto scenario : g.scenarios)
    for (double tax : g.co2_tax)
      for (double rec : g.co2_recovery_ratio)
        for (double re : g.max_re)
          for (int year : g.price_year)
            for (bool dh : g.dh_enabled)
              for (bool bc : g.biochar_enabled) {
                ScenarioConfig c = base;
                c.scenario = scenario;
                c.co2_tax = tax;
                c.co2_recovery_ratio = rec;
                c.max_re = re;
                c.price_year = year;
                c.dh_enabled = dh;
                c.biochar_enabled = bc;
                c.name = case_label(c);
                out.push_back(std::move(c));
              }
  return out;
}

// ---------------------------------------------------------------------------
// single case

namespace {

LpSolution solve_lp(const LpProblem& problem, const RunOptions& options, const std::string& solver) {
  if (solver == "reference") {
    if (problem.num_columns() > options.reference.column_limit) {
      LpSolution s;
      s.solver = "reference";
      s.status = SolveStatus::Error;
      s.message = fmt::format("problem has {} columns, above the reference solver limit of {}; use the external solver",
                              problem.num_columns(), options.reference.column_limit);
      return s;
    }
    return solve_reference(problem, options.reference);
  }
  return solve_external(problem, options.backend);
}

struct MinBuild {
  std::string link;
  std::size_t column;
  double minimum;
};

}  // namespace

LpSolution solve_with_min_build(const Network& network, LpProblem& problem, const RunOptions& options,
                                std::vector<std::string>* log) {
  const std::string solver = options.solver.empty() ? "external" : options.solver;
  LpSolution best = solve_lp(problem, options, solver);
  if (!options.branch_min_build || !best.optimal()) return best;

  std::vector<MinBuild> candidates;
  for (const auto& l : network.links)
    if (l.extendable && l.min_build && *l.min_build > 0.0)
      candidates.push_back({l.name, problem.column_index(lpnames::capacity(l.name)), *l.min_build});

  auto& cols = problem.mutable_columns();
  std::set<std::string> decided;
  constexpr double kEps = 1e-6;
  for (int round = 0; round < 4; ++round) {
    std::vector<MinBuild> open;
    for (const auto& c : candidates) {
      const double x = best.primal[c.column];
      if (!decided.count(c.link) && x > kEps && x < c.minimum - kEps) open.push_back(c);
    }
    if (open.empty()) break;
    // Every built/unbuilt combination of the undersized links; the hub has at most a handful.
    const std::size_t combos = std::size_t{1} << std::min<std::size_t>(open.size(), 6);
    std::vector<std::pair<double, double>> saved;
    for (const auto& c : open) saved.emplace_back(cols[c.column].lower, cols[c.column].upper);
    LpSolution winner;
    std::size_t winning_mask = 0;
    for (std::size_t mask = 0; mask < combos; ++mask) {
      for (std::size_t k = 0; k < open.size(); ++k) {
        const bool built = k < 6 ? ((mask >> k) & 1U) != 0 : true;
        cols[open[k].column].lower = built ? open[k].minimum : 0.0;
        cols[open[k].column].upper = built ? saved[k].second : 0.0;
      }
      LpSolution s = solve_lp(problem, options, solver);
      if (log) {
        std::string branch;
        for (std::size_t k = 0; k < open.size(); ++k)
          branch += fmt::format("{}{}={}", k ? ", " : "", open[k].link,
                                (k < 6 ? ((mask >> k) & 1U) != 0 : true) ? ">=min" : "0");
        log->push_back(fmt::format("min-build branch [{}]: {} {}", branch, to_string(s.status),
                                   s.optimal() ? fmt::format("{:.6g}", s.objective) : s.message));
      }
      if (s.optimal() && (!winner.optimal() || s.objective < winner.objective)) {
        winner = std::move(s);
        winning_mask = mask;
      }
    }
    if (!winner.optimal()) {
      for (std::size_t k = 0; k < open.size(); ++k) {
        cols[open[k].column].lower = saved[k].first;
        cols[open[k].column].upper = saved[k].second;
      }
      if (log) log->push_back("min-build branching found no optimal branch; keeping the relaxed solution");
      return best;
    }
    for (std::size_t k = 0; k < open.size(); ++k) {
      const bool built = k < 6 ? ((winning_mask >> k) & 1U) != 0 : true;
      cols[open[k].column].lower = built ? open[k].minimum : 0.0;
      cols[open[k].column].upper = built ? saved[k].second : 0.0;
      decided.insert(open[k].link);
    }
    best = std::move(winner);
  }
  return best;
}

CaseResult run_case(const ScenarioConfig& config, const Catalog& catalog, const MarketSeries& market,
                    const RunOptions& options) {
  CaseResult r;
  r.name = config.name;
  r.scenario = to_json(config);
  try {
    const auto problems = validate_config(config);
    if (!problems.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& p : problems) msg += " " + p + ";";
      throw InputError(msg);
    }
    RunOptions opts = options;
    if (opts.solver.empty()) opts.solver = config.solver;
    const Hub hub = build_hub(config, catalog, market);
    std::vector<std::string> warnings;
    LpProblem lp = assemble(hub.network, &warnings);
    std::vector<std::string> log;
    const LpSolution sol = solve_with_min_build(hub.network, lp, opts, &log);
    ResultOptions ro;
    ro.h2_load = hub::h2_load;
    ro.meoh_load = hub::meoh_load;
    r = make_case_result(hub.network, lp, sol, ro);
    r.name = config.name;
    r.scenario = to_json(config);
    r.warnings = config_warnings(config);
    r.warnings.insert(r.warnings.end(), hub.warnings.begin(), hub.warnings.end());
    r.warnings.insert(r.warnings.end(), warnings.begin(), warnings.end());
    r.warnings.insert(r.warnings.end(), log.begin(), log.end());
    std::set<std::string> seen;
    std::erase_if(r.warnings, [&](const std::string& w) { return !seen.insert(w).second; });
    if (sol.status == SolveStatus::Error) r.error = sol.message.empty() ? "solver error" : sol.message;
  } catch (const std::exception& e) {
    r.solver.status = SolveStatus::Error;
    r.error = e.what();
  }
  return r;
}

CaseResult run_case(const ScenarioConfig& config, const Catalog& catalog, const RunOptions& options) {
  MarketSeries market;
  try {
    market = load_case_market(config);
  } catch (const std::exception& e) {
    CaseResult r;
    r.name = config.name;
    r.scenario = to_json(config);
    r.solver.status = SolveStatus::Error;
    r.error = e.what();
    return r;
  }
  return run_case(config, catalog, market, options);
}

// ---------------------------------------------------------------------------
// sweep spec and persistence

json to_json(const SweepSpec& s) {
  return {{"base", to_json(s.base)},
          {"grid", to_json(s.grid)},
          {"output_dir", s.output_dir},
          {"jobs", s.jobs},
          {"solver", s.run.solver},
          {"branch_min_build", s.run.branch_min_build}};
}

SweepSpec sweep_spec_from_json(const json& doc) {
  static const std::set<std::string> known{"base", "grid", "output_dir", "jobs", "solver", "branch_min_build"};
  if (!doc.is_object()) throw InputError("sweep spec must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!known.count(it.key())) throw InputError("sweep spec: unknown key '" + it.key() + "'");
  SweepSpec s;
  if (doc.contains("base")) s.base = config_from_json(doc["base"]);
  if (doc.contains("grid")) s.grid = grid_from_json(doc["grid"]);
  try {
    s.output_dir = doc.value("output_dir", s.output_dir);
    s.jobs = doc.value("jobs", s.jobs);
    s.run.solver = doc.value("solver", s.run.solver);
    s.run.branch_min_build = doc.value("branch_min_build", s.run.branch_min_build);
  } catch (const json::exception& e) {
    throw InputError(std::string("sweep spec: ") + e.what());
  }
  if (s.jobs < 1) throw InputError("sweep spec: jobs must be >= 1");
  return s;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open sweep spec " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  SweepSpec s = sweep_spec_from_json(doc);
  const fs::path here = fs::path(path).parent_path();
  if (!s.base.data_dir.empty() && fs::path(s.base.data_dir).is_relative())
    s.base.data_dir = (here / s.base.data_dir).lexically_normal().string();
  if (fs::path(s.output_dir).is_relative()) s.output_dir = (here / s.output_dir).lexically_normal().string();
  return s;
}

std::string case_directory(const std::string& output_dir, const ScenarioConfig& config) {
  return (fs::path(output_dir) / SweepFiles::cases / (case_label(config) + "-" + hash_hex(config_hash(config))))
      .string();
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

/// A previous result is reused only when its config hashes identically and it did not error.
std::optional<CaseResult> resumable(const std::string& dir, const ScenarioConfig& config) {
  const fs::path d(dir);
  if (!fs::exists(d / ResultFiles::result) || !fs::exists(d / SweepFiles::config)) return std::nullopt;
  try {
    std::ifstream in(d / SweepFiles::config);
    json doc;
    in >> doc;
    if (config_hash(config_from_json(doc)) != config_hash(config)) return std::nullopt;
    CaseResult r = read_case_result(dir);
    if (!r.error.empty()) return std::nullopt;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string market_key(const ScenarioConfig& c) {
  const json j = to_json(c);
  return j["horizon"].dump() + "|" + market_dir(c) + "|" + j["tariffs"].dump();
}

}  // namespace

SweepSummary run_sweep(const SweepSpec& spec, const Catalog& catalog, const ProgressFn& progress) {
  SweepSummary summary;
  const auto configs = enumerate_cases(spec.base, spec.grid);
  summary.cases.resize(configs.size());
  fs::create_directories(fs::path(spec.output_dir) / SweepFiles::cases);

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto& sc = summary.cases[i];
    sc.index = i;
    sc.config = configs[i];
    sc.directory = case_directory(spec.output_dir, configs[i]);
    if (auto prior = resumable(sc.directory, sc.config)) {
      sc.result = std::move(*prior);
      sc.resumed = true;
    } else {
      pending.push_back(i);
    }
  }

  // Markets are read once per distinct data source and shared read-only by the workers.
  struct MarketSlot {
    std::shared_ptr<const MarketSeries> market;
    std::string error;
  };
  std::map<std::string, MarketSlot> markets;
  for (std::size_t i : pending) {
    const auto key = market_key(configs[i]);
    if (markets.count(key)) continue;
    MarketSlot slot;
    try {
      slot.market = std::make_shared<const MarketSeries>(load_case_market(configs[i]));
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
    markets.emplace(key, std::move(slot));
  }

  std::mutex mu;
  std::size_t done = 0;
  const std::size_t total = configs.size();
  for (const auto& sc : summary.cases)
    if (sc.resumed) {
      ++done;
      if (progress) progress(sc, done, total);
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      SweepCase& sc = summary.cases[pending[k]];
      const MarketSlot& slot = markets.at(market_key(sc.config));
      if (slot.market) {
        sc.result = run_case(sc.config, catalog, *slot.market, spec.run);
      } else {
        sc.result.name = sc.config.name;
        sc.result.scenario = to_json(sc.config);
        sc.result.solver.status = SolveStatus::Error;
        sc.result.error = slot.error;
      }
      try {
        fs::create_directories(sc.directory);
        write_text(fs::path(sc.directory) / SweepFiles::config, to_json(sc.config).dump(2) + "\n");
        write_text(fs::path(sc.directory) / SweepFiles::fingerprint,
                   fmt::format("{:016x}\n", sc.result.solver.lp_fingerprint));
        write_case_result(sc.directory, sc.result);
      } catch (const std::exception& e) {
        if (sc.result.error.empty()) sc.result.error = e.what();
      }
      std::lock_guard<std::mutex> lock(mu);
      ++done;
      if (progress) progress(sc, done, total);
    }
  };
  const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(std::max<std::size_t>(pending.size(), 1))));
  std::vector<std::thread> threads;
  for (int j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::string index = "index,label,config_hash,status,lcoh,lcom,resumed,directory\n";
  for (const auto& sc : summary.cases) {
    if (sc.resumed) ++summary.resumed;
    if (sc.result.optimal()) {
      ++summary.completed;
    } else {
      ++summary.failed;
    }
    index += fmt::format("{},{},{},{},{},{},{:d},{}\n", sc.index, case_label(sc.config),
                         hash_hex(config_hash(sc.config)),
                         sc.result.error.empty() ? to_string(sc.result.solver.status) : "error",
                         sc.result.lcoh ? fmt::format("{:.6g}", *sc.result.lcoh) : "",
                         sc.result.lcom ? fmt::format("{:.6g}", *sc.result.lcom) : "", sc.resumed,
                         fs::path(sc.directory).filename().string());
  }
  write_text(fs::path(spec.output_dir) / SweepFiles::index, index);
  return summary;
}

std::vector<CaseResult> load_sweep_results(const std::string& output_dir) {
  std::vector<CaseResult> out;
  const fs::path root = fs::path(output_dir) / SweepFiles::cases;
  if (!fs::is_directory(root)) return out;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::exists(e.path() / ResultFiles::result)) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) out.push_back(read_case_result(d.string()));
  return out;
}

// ---------------------------------------------------------------------------
// aggregation

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return std::nan("");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  const double scale = std::max({1.0, std::abs(ma), std::abs(mb)});
  if (saa <= 1e-18 * scale * scale * static_cast<double>(n) || sbb <= 1e-18 * scale * scale * static_cast<double>(n))
    return std::nan("");
  return sab / std::sqrt(saa * sbb);
}

namespace {

const std::set<std::string> kContextGroups{"external", "sink", "reference_plant"};

struct Params {
  std::string scenario;
  int year = 0;
  double tax = 0.0, recovery = 0.0, max_re = 0.0;
  bool dh = false, biochar = false;
};

Params params_of(const CaseResult& r) {
  Params p;
  const auto& s = r.scenario;
  p.scenario = s.value("scenario", "");
  p.year = s.value("price_year", 0);
  p.tax = s.value("co2_tax", 0.0);
  p.recovery = s.value("co2_recovery_ratio", 0.0);
  p.max_re = s.value("max_re", 0.0);
  p.dh = s.value("dh_enabled", false);
  p.biochar = s.value("biochar_enabled", false);
  return p;
}

std::vector<std::pair<std::string, double>> metrics_of(const CaseResult& r) {
  std::vector<std::pair<std::string, double>> m;
  if (!r.optimal()) return m;
  if (r.lcoh) m.emplace_back("lcoh", *r.lcoh);
  if (r.lcom) m.emplace_back("lcom", *r.lcom);
  m.emplace_back("total_cost", r.breakdown.total);
  m.emplace_back("total_with_ptx_sales", r.breakdown.total_with_ptx_sales);
  m.emplace_back("external_trade", r.breakdown.external_trade);
  for (const auto& [name, cap] : r.capacities) {
    const auto g = r.groups.find(name);
    if (g != r.groups.end() && kContextGroups.count(g->second)) continue;
    m.emplace_back("cap." + name, cap);
  }
  for (const auto& p : r.prices) m.emplace_back("price_mean." + p.bus, p.mean);
  return m;
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

}  // namespace

AggregateTables aggregate(const std::vector<CaseResult>& results, const AggregateFilter& filter) {
  AggregateTables t;
  t.long_csv = "case,scenario,price_year,co2_tax,co2_recovery_ratio,max_re,dh_enabled,biochar_enabled,status,metric,value\n";
  t.correlation_csv = "group,metric_a,metric_b,pearson,n\n";
  t.recovery_csv = "case,scenario,price_year,co2_tax,max_re,dh_enabled,biochar_enabled,co2_recovery_ratio,lcoh,lcom,status\n";

  // group -> metric -> per-case values (NaN when the case lacks it)
  std::map<std::string, std::vector<std::map<std::string, double>>> groups;
  for (const auto& r : results) {
    const Params p = params_of(r);
    if (filter.scenario && p.scenario != to_string(*filter.scenario)) continue;
    if (filter.price_year && p.year != *filter.price_year) continue;
    ++t.cases;
    const std::string status = r.error.empty() ? to_string(r.solver.status) : "error";
    const std::string prefix = fmt::format("{},{},{},{:g},{:g},{:g},{:d},{:d},{}", r.name, p.scenario, p.year, p.tax,
                                           p.recovery, p.max_re, p.dh, p.biochar, status);
    const auto metrics = metrics_of(r);
    for (const auto& [metric, value] : metrics) {
      t.long_csv += fmt::format("{},{},{}\n", prefix, metric, num(value));
      ++t.rows;
    }
    t.recovery_csv += fmt::format("{},{},{},{:g},{:g},{:d},{:d},{:g},{},{},{}\n", r.name, p.scenario, p.year, p.tax,
                                  p.max_re, p.dh, p.biochar, p.recovery, r.lcoh && r.optimal() ? num(*r.lcoh) : "",
                                  r.lcom && r.optimal() ? num(*r.lcom) : "", status);
    if (r.optimal()) groups[fmt::format("{}-{}", p.scenario, p.year)].emplace_back(metrics.begin(), metrics.end());
  }

  for (const auto& [group, rows] : groups) {
    std::set<std::string> names;
    for (const auto& row : rows)
      for (const auto& [name, v] : row)
        if (name.rfind("cap.", 0) == 0 || name.rfind("price_mean.", 0) == 0) names.insert(name);
    const std::vector<std::string> list(names.begin(), names.end());
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        std::vector<double> a, b;
        for (const auto& row : rows) {
          const auto ia = row.find(list[i]);
          const auto ib = row.find(list[j]);
          if (ia == row.end() || ib == row.end()) continue;
          a.push_back(ia->second);
          b.push_back(ib->second);
        }
        const double r = pearson(a, b);
        if (std::isnan(r)) continue;
        t.correlation_csv += fmt::format("{},{},{},{:.6f},{}\n", group, list[i], list[j], r, a.size());
      }
  }
  return t;
}

std::string recovery_gnuplot(const std::string& csv_name) {
  return fmt::format(
      "# LCOM against the CO2 recovery ratio, one curve per scenario and price year\n"
      "set datafile separator ','\n"
      "set key top left\n"
      "set xlabel 'CO2 recovery ratio'\n"
      "set ylabel 'LCOM (EUR/MWh)'\n"
      "set terminal pngcairo size 900,600\n"
      "set output 'cost_vs_recovery.png'\n"
      "file = '{0}'\n"
      "plot for [s in 'H2_to_grid MeOH_standalone'] for [y in '2019 2022'] \\\n"
      "  file using (strcol(2) eq s && strcol(3) eq y ? $8 : 1/0):10 every ::1 \\\n"
      "  with linespoints title s.' '.y\n",
      csv_name);
}

}  // namespace hubopt
