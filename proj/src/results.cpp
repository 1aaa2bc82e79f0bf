#include "hubopt/results.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace hubopt {

namespace fs = std::filesystem;

namespace {

constexpr const char* kExternalGroup = "external";

void require_duals(const LpProblem& problem, const LpSolution& solution) {
  if (!solution.optimal()) throw InputError("solution is not optimal (" + to_string(solution.status) + ")");
  if (solution.duals.size() != problem.num_rows() || solution.primal.size() != problem.num_columns())
    throw InputError("solution does not match the problem dimensions");
}

std::size_t horizon_length(const LpProblem& problem, const std::string& bus) {
  std::size_t n = 0;
  while (problem.has_row(lpnames::balance(bus, n))) ++n;
  return n;
}

std::map<std::string, std::string> group_map(const Network& net) {
  std::map<std::string, std::string> out;
  for (const auto& g : net.generators) out[g.name] = g.group;
  for (const auto& l : net.links) out[l.name] = l.group;
  for (const auto& s : net.stores) out[s.name] = s.group;
  return out;
}

double weight(const Network& net) { return net.snapshots.size() ? net.snapshots.horizon_weight() : 1.0; }

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

SolveStatus status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded, SolveStatus::Error})
    if (to_string(st) == s) return st;
  throw InputError("unknown solve status '" + s + "'");
}

}  // namespace

double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  if (q <= 0.0) return sorted.front();
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

std::vector<double> shadow_prices(const LpProblem& problem, const LpSolution& solution, const std::string& bus) {
  const std::size_t n = horizon_length(problem, bus);
  if (n == 0) throw InputError("unknown bus '" + bus + "'");
  require_duals(problem, solution);
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = solution.duals[problem.row_index(lpnames::balance(bus, t))];
  return out;
}

PriceStats shadow_stats(const LpProblem& problem, const LpSolution& solution, const std::string& bus) {
  std::vector<double> lambda = shadow_prices(problem, solution, bus);
  PriceStats s;
  s.bus = bus;
  s.mean = std::accumulate(lambda.begin(), lambda.end(), 0.0) / static_cast<double>(lambda.size());
  std::sort(lambda.begin(), lambda.end());
  s.min = lambda.front();
  s.max = lambda.back();
  for (double q : kQuantileLevels) s.quantiles.push_back(nearest_rank(lambda, q));
  return s;
}

std::map<std::string, double> levelized_costs(const LpProblem& problem, const LpSolution& solution) {
  require_duals(problem, solution);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    const auto& tag = problem.rows()[i].tag;
    if (tag.kind == RowKind::AnnualDemand) out[tag.component] = solution.duals[i];
  }
  return out;
}

double levelized_cost(const LpProblem& problem, const LpSolution& solution, const std::string& load) {
  const std::string row = lpnames::annual_demand(load);
  if (!problem.has_row(row)) throw InputError("no annual demand row for load '" + load + "'");
  require_duals(problem, solution);
  return solution.duals[problem.row_index(row)];
}

CostBreakdown cost_breakdown(const Network& network, const LpProblem& problem, const LpSolution& solution) {
  require_duals(problem, solution);
  const double w = weight(network);
  const auto groups = group_map(network);
  std::map<std::string, bool> external;
  for (const auto& l : network.links) external[l.name] = l.external_trade || l.group == kExternalGroup;
  for (const auto& g : network.generators) external[g.name] = g.group == kExternalGroup;

  std::map<std::string, GroupCost> by_group;
  CostBreakdown b;
  for (std::size_t j = 0; j < problem.num_columns(); ++j) {
    const auto& col = problem.columns()[j];
    const double cost = col.cost * solution.primal[j] * w;
    if (col.cost == 0.0) continue;
    const auto it = groups.find(col.tag.component);
    if (it == groups.end() || it->second.empty())
      throw InputError("component '" + col.tag.component + "' has no cost group");
    GroupCost& gc = by_group[it->second];
    gc.group = it->second;
    const bool capital = col.tag.kind == ColumnKind::GenCapacity || col.tag.kind == ColumnKind::LinkCapacity ||
                         col.tag.kind == ColumnKind::StoreCapacity;
    if (capital) {
      gc.capital += cost;
      b.capital += cost;
    } else {
      gc.marginal += cost;
      b.marginal += cost;
      if (external[col.tag.component]) b.external_trade += cost;
    }
  }
  for (auto& [name, gc] : by_group) b.groups.push_back(gc);
  b.total = b.capital + b.marginal;

  for (const auto& ld : network.loads) {
    if (!ld.is_annual()) continue;
    b.ptx_value += levelized_cost(problem, solution, ld.name) * std::get<AnnualTotal>(ld.kind).total;
  }
  b.total_with_ptx_sales = b.total - b.ptx_value;
  return b;
}

DualityAudit duality_audit(const Network& network, const LpProblem& problem, const LpSolution& solution,
                           double tolerance) {
  DualityAudit a;
  if (!solution.optimal() || solution.duals.size() != problem.num_rows() ||
      solution.primal.size() != problem.num_columns()) {
    a.findings.push_back("no optimal solution to audit (" + to_string(solution.status) + ")");
    return a;
  }
  const double w = weight(network);
  const auto& x = solution.primal;
  const auto& y = solution.duals;

  double cx = 0.0;
  for (std::size_t j = 0; j < problem.num_columns(); ++j) {
    cx += problem.columns()[j].cost * x[j];
    if (x[j] != 0.0 && j < solution.reduced_costs.size()) a.bound_rents += solution.reduced_costs[j] * x[j];
  }
  a.objective = cx * w;
  a.bound_rents *= w;

  std::vector<double> activity(problem.num_rows(), 0.0);
  for (const auto& e : problem.entries()) activity[e.row] += e.value * x[e.col];

  std::map<std::string, BusImbalance> imbalance;
  std::set<std::string> unbalanced;
  double balance_value = 0.0;
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    const auto& row = problem.rows()[i];
    const double yb = y[i] * row.rhs * w;
    switch (row.tag.kind) {
      case RowKind::NodalBalance:
      case RowKind::StoreContinuity: {
        balance_value += yb;
        auto& imb = imbalance[row.tag.bus];
        imb.bus = row.tag.bus;
        const double r = std::abs(activity[i] - row.rhs);
        if (r > imb.max_abs) {
          imb.max_abs = r;
          imb.worst_snapshot = row.tag.snapshot;
        }
        if (r > tolerance * std::max(1.0, std::abs(row.rhs))) unbalanced.insert(row.tag.bus);
        break;
      }
      case RowKind::AnnualDemand:
        a.load_values[row.tag.component] += yb;
        a.load_value += yb;
        break;
      default:
        a.capacity_rents += yb;
    }
  }

  // Split balance-row value over the fixed loads that make up each right-hand side.
  double attributed = 0.0;
  for (const auto& ld : network.loads) {
    if (ld.is_annual()) continue;
    const auto& d = std::get<FixedSeries>(ld.kind).demand;
    double v = 0.0;
    for (std::size_t t = 0; t < network.snapshots.size(); ++t) {
      const std::string name = lpnames::balance(ld.bus, t);
      if (problem.has_row(name)) v += y[problem.row_index(name)] * d.at(t) * w;
    }
    a.load_values[ld.name] += v;
    attributed += v;
  }
  a.load_value += attributed;
  // Any remainder would come from balance right-hand sides not owned by a load.
  a.capacity_rents += balance_value - attributed;

  for (const auto& l : network.links) {
    if (!l.external_trade) continue;
    const std::string first = lpnames::dispatch(l.name, 0);
    if (!problem.has_column(first)) continue;
    const std::size_t base = problem.column_index(first);
    for (std::size_t t = 0; t < network.snapshots.size(); ++t)
      a.external_trade += problem.columns()[base + t].cost * x[base + t] * w;
  }

  a.residual = a.objective - (a.load_value + a.capacity_rents + a.bound_rents);
  const double scale =
      std::max({1.0, std::abs(a.objective), std::abs(a.load_value), std::abs(a.capacity_rents), std::abs(a.bound_rents)});
  a.relative_residual = std::abs(a.residual) / scale;
  if (a.relative_residual > tolerance)
    a.findings.push_back(fmt::format("cost recovery identity off by {} (relative {})", num(a.residual),
                                     num(a.relative_residual)));
  if (std::abs(solution.objective * w - a.objective) > tolerance * std::max(1.0, std::abs(a.objective)))
    a.findings.push_back(fmt::format("reported objective {} differs from c'x {}", num(solution.objective * w),
                                     num(a.objective)));

  for (const auto& bus : unbalanced) {
    const auto& imb = imbalance.at(bus);
    a.findings.push_back(
        fmt::format("bus {} out of balance by {} at snapshot {}", bus, num(imb.max_abs), imb.worst_snapshot));
  }
  for (auto& [bus, imb] : imbalance) a.imbalances.push_back(imb);
  std::stable_sort(a.imbalances.begin(), a.imbalances.end(),
                   [](const BusImbalance& p, const BusImbalance& q) { return p.max_abs > q.max_abs; });
  return a;
}

CaseResult make_case_result(const Network& network, const LpProblem& problem, const LpSolution& solution,
                            const ResultOptions& options) {
  CaseResult r;
  r.name = network.name;
  r.solver.solver = solution.solver;
  r.solver.status = solution.status;
  r.solver.objective = solution.objective;
  r.solver.wall_seconds = solution.wall_seconds;
  r.solver.iterations = solution.iterations;
  r.solver.message = solution.message;
  r.solver.lp_fingerprint = problem.fingerprint();
  r.solver.rows = problem.num_rows();
  r.solver.columns = problem.num_columns();
  r.groups = group_map(network);
  if (!solution.optimal()) return r;

  const KktReport kkt = check_kkt(problem, solution);
  r.solver.kkt_passed = kkt.passed();
  r.solver.kkt = kkt.summary();

  const auto& x = solution.primal;
  const double w = weight(network);
  auto capacity = [&](const std::string& name, bool extendable, double fixed) {
    r.capacities[name] = extendable ? x[problem.column_index(lpnames::capacity(name))] : fixed;
  };
  for (const auto& g : network.generators) capacity(g.name, g.extendable, g.fixed_capacity);
  for (const auto& s : network.stores) capacity(s.name, s.extendable, s.fixed_energy_capacity);
  for (const auto& l : network.links) {
    capacity(l.name, l.extendable, l.fixed_capacity);
    const std::size_t base = problem.column_index(lpnames::dispatch(l.name, 0));
    double flow = 0.0;
    for (std::size_t t = 0; t < network.snapshots.size(); ++t) flow += x[base + t];
    r.annual_flows[l.name] = flow * w;
  }

  r.levelized = levelized_costs(problem, solution);
  if (auto it = r.levelized.find(options.h2_load); it != r.levelized.end()) r.lcoh = it->second;
  if (auto it = r.levelized.find(options.meoh_load); it != r.levelized.end()) r.lcom = it->second;

  for (const auto& b : network.buses) {
    r.prices.push_back(shadow_stats(problem, solution, b.name));
    if (options.hourly_prices) r.hourly_prices[b.name] = shadow_prices(problem, solution, b.name);
  }
  if (options.hourly_prices)
    for (const auto& t : network.snapshots.timestamps()) r.timestamps.push_back(format_timestamp(t));

  r.breakdown = cost_breakdown(network, problem, solution);
  r.audit = duality_audit(network, problem, solution);
  return r;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const CaseResult& r) {
  using nlohmann::json;
  json j;
  j["name"] = r.name;
  j["scenario"] = r.scenario;
  j["error"] = r.error;
  j["warnings"] = r.warnings;
  j["solver"] = {{"solver", r.solver.solver},
                 {"status", to_string(r.solver.status)},
                 {"objective", r.solver.objective},
                 {"wall_seconds", r.solver.wall_seconds},
                 {"iterations", r.solver.iterations},
                 {"message", r.solver.message},
                 {"kkt_passed", r.solver.kkt_passed},
                 {"kkt", r.solver.kkt},
                 {"lp_fingerprint", fmt::format("{:016x}", r.solver.lp_fingerprint)},
                 {"rows", r.solver.rows},
                 {"columns", r.solver.columns}};
  j["capacities"] = r.capacities;
  j["groups"] = r.groups;
  j["annual_flows"] = r.annual_flows;
  j["levelized"] = r.levelized;
  j["lcoh"] = r.lcoh ? json(*r.lcoh) : json(nullptr);
  j["lcom"] = r.lcom ? json(*r.lcom) : json(nullptr);
  json prices = json::array();
  for (const auto& p : r.prices)
    prices.push_back({{"bus", p.bus}, {"mean", p.mean}, {"min", p.min}, {"max", p.max}, {"quantiles", p.quantiles}});
  j["prices"] = prices;
  json groups = json::array();
  for (const auto& g : r.breakdown.groups)
    groups.push_back({{"group", g.group}, {"capital", g.capital}, {"marginal", g.marginal}});
  j["breakdown"] = {{"groups", groups},
                    {"capital", r.breakdown.capital},
                    {"marginal", r.breakdown.marginal},
                    {"external_trade", r.breakdown.external_trade},
                    {"total", r.breakdown.total},
                    {"ptx_value", r.breakdown.ptx_value},
                    {"total_with_ptx_sales", r.breakdown.total_with_ptx_sales}};
  json imb = json::array();
  for (const auto& b : r.audit.imbalances)
    imb.push_back({{"bus", b.bus}, {"max_abs", b.max_abs}, {"worst_snapshot", b.worst_snapshot}});
  j["audit"] = {{"objective", r.audit.objective},
                {"load_value", r.audit.load_value},
                {"load_values", r.audit.load_values},
                {"capacity_rents", r.audit.capacity_rents},
                {"bound_rents", r.audit.bound_rents},
                {"external_trade", r.audit.external_trade},
                {"residual", r.audit.residual},
                {"relative_residual", r.audit.relative_residual},
                {"imbalances", imb},
                {"findings", r.audit.findings}};
  return j;
}

CaseResult case_result_from_json(const nlohmann::json& j) {
  CaseResult r;
  try {
    r.name = j.at("name").get<std::string>();
    r.scenario = j.value("scenario", nlohmann::json());
    r.error = j.value("error", "");
    r.warnings = j.value("warnings", std::vector<std::string>{});
    const auto& s = j.at("solver");
    r.solver.solver = s.at("solver").get<std::string>();
    r.solver.status = status_from_string(s.at("status").get<std::string>());
    r.solver.objective = s.at("objective").get<double>();
    r.solver.wall_seconds = s.at("wall_seconds").get<double>();
    r.solver.iterations = s.at("iterations").get<long>();
    r.solver.message = s.at("message").get<std::string>();
    r.solver.kkt_passed = s.at("kkt_passed").get<bool>();
    r.solver.kkt = s.at("kkt").get<std::string>();
    r.solver.lp_fingerprint = std::stoull(s.at("lp_fingerprint").get<std::string>(), nullptr, 16);
    r.solver.rows = s.at("rows").get<std::size_t>();
    r.solver.columns = s.at("columns").get<std::size_t>();
    r.capacities = j.at("capacities").get<std::map<std::string, double>>();
    r.groups = j.at("groups").get<std::map<std::string, std::string>>();
    r.annual_flows = j.at("annual_flows").get<std::map<std::string, double>>();
    r.levelized = j.at("levelized").get<std::map<std::string, double>>();
    if (!j.at("lcoh").is_null()) r.lcoh = j.at("lcoh").get<double>();
    if (!j.at("lcom").is_null()) r.lcom = j.at("lcom").get<double>();
    for (const auto& p : j.at("prices"))
      r.prices.push_back({p.at("bus").get<std::string>(), p.at("mean").get<double>(), p.at("min").get<double>(),
                          p.at("max").get<double>(), p.at("quantiles").get<std::vector<double>>()});
    const auto& b = j.at("breakdown");
    for (const auto& g : b.at("groups"))
      r.breakdown.groups.push_back(
          {g.at("group").get<std::string>(), g.at("capital").get<double>(), g.at("marginal").get<double>()});
    r.breakdown.capital = b.at("capital").get<double>();
    r.breakdown.marginal = b.at("marginal").get<double>();
    r.breakdown.external_trade = b.at("external_trade").get<double>();
    r.breakdown.total = b.at("total").get<double>();
    r.breakdown.ptx_value = b.at("ptx_value").get<double>();
    r.breakdown.total_with_ptx_sales = b.at("total_with_ptx_sales").get<double>();
    const auto& a = j.at("audit");
    r.audit.objective = a.at("objective").get<double>();
    r.audit.load_value = a.at("load_value").get<double>();
    r.audit.load_values = a.at("load_values").get<std::map<std::string, double>>();
    r.audit.capacity_rents = a.at("capacity_rents").get<double>();
    r.audit.bound_rents = a.at("bound_rents").get<double>();
    r.audit.external_trade = a.at("external_trade").get<double>();
    r.audit.residual = a.at("residual").get<double>();
    r.audit.relative_residual = a.at("relative_residual").get<double>();
    for (const auto& i : a.at("imbalances"))
      r.audit.imbalances.push_back(
          {i.at("bus").get<std::string>(), i.at("max_abs").get<double>(), i.at("worst_snapshot").get<int>()});
    r.audit.findings = a.at("findings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed case result: ") + e.what());
  }
  return r;
}

std::string capacities_csv(const CaseResult& r) {
  std::string out = "component,group,capacity,annual_flow\n";
  for (const auto& [name, cap] : r.capacities) {
    const auto g = r.groups.find(name);
    const auto f = r.annual_flows.find(name);
    out += fmt::format("{},{},{},{}\n", name, g == r.groups.end() ? "" : g->second, num(cap),
                       f == r.annual_flows.end() ? "" : num(f->second));
  }
  return out;
}

std::string prices_csv(const CaseResult& r) {
  std::string out = "bus,mean,min,max";
  for (double q : kQuantileLevels) out += fmt::format(",q{:02d}", static_cast<int>(std::lround(q * 100)));
  out += "\n";
  for (const auto& p : r.prices) {
    out += fmt::format("{},{},{},{}", p.bus, num(p.mean), num(p.min), num(p.max));
    for (double q : p.quantiles) out += "," + num(q);
    out += "\n";
  }
  return out;
}

std::string breakdown_csv(const CaseResult& r) {
  const auto& b = r.breakdown;
  std::string out = "item,capital,marginal,total\n";
  for (const auto& g : b.groups)
    out += fmt::format("{},{},{},{}\n", g.group, num(g.capital), num(g.marginal), num(g.capital + g.marginal));
  out += fmt::format("external_trade,,{},{}\n", num(b.external_trade), num(b.external_trade));
  out += fmt::format("total,{},{},{}\n", num(b.capital), num(b.marginal), num(b.total));
  out += fmt::format("ptx_value,,,{}\n", num(b.ptx_value));
  out += fmt::format("total_with_ptx_sales,,,{}\n", num(b.total_with_ptx_sales));
  return out;
}

std::string duals_csv(const CaseResult& r) {
  std::string out = "snapshot,timestamp";
  for (const auto& [bus, series] : r.hourly_prices) out += "," + bus;
  out += "\n";
  for (std::size_t t = 0; t < r.timestamps.size(); ++t) {
    out += fmt::format("{},{}", t, r.timestamps[t]);
    for (const auto& [bus, series] : r.hourly_prices) out += "," + num(series.at(t));
    out += "\n";
  }
  return out;
}

void write_case_result(const std::string& dir, const CaseResult& r) {
  const fs::path d(dir);
  fs::create_directories(d);
  write_text(d / ResultFiles::result, to_json(r).dump(2) + "\n");
  write_text(d / ResultFiles::capacities, capacities_csv(r));
  write_text(d / ResultFiles::prices, prices_csv(r));
  write_text(d / ResultFiles::breakdown, breakdown_csv(r));
  write_text(d / ResultFiles::duals, duals_csv(r));
}

CaseResult read_case_result(const std::string& dir) {
  const fs::path path = fs::path(dir) / ResultFiles::result;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return case_result_from_json(doc);
}

}  // namespace hubopt
