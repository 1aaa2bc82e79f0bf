// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--quick] [--seed N]
//
// --quick skips the four-week trend cases (criterion 7) and the operational checks on them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "../tests/cost_table.hpp"
#include "hubopt/catalog.hpp"
#include "hubopt/lpform.hpp"
#include "hubopt/market.hpp"
#include "hubopt/results.hpp"
#include "hubopt/solver.hpp"
#include "hubopt/sweep.hpp"

using namespace hubopt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  int id = 0;
  bool pass = false;
  bool waived = false;
  std::string detail;
};

void report(const Verdict& v) {
  const char* word = v.waived ? "WAIVED" : (v.pass ? "PASS" : "FAIL");
  fmt::print("criterion {}: {} - {}\n", v.id, word, v.detail);
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Criterion 1: random toy networks against a capacity search with greedy dispatch.

struct ToyGen {
  int bus = 0;
  double cap = 0.0;  // fixed capacity; ignored when extendable
  double marginal = 0.0;
  std::vector<double> avail;
  double capital = 0.0;
  bool extendable = false;
};

struct ToyLink {
  int to = 1;  // always drawn from bus 0
  double eff = 1.0;
  double cap = 0.0;
  double marginal = 0.0;
  double capital = 0.0;
  bool extendable = false;
};

struct Toy {
  int buses = 1;
  int hours = 1;
  std::vector<std::vector<double>> demand;  // [bus][t]
  std::vector<ToyGen> gens;
  std::vector<ToyLink> links;  // at most one per destination bus
};

Toy random_toy(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };
  Toy toy;
  toy.buses = 1 + static_cast<int>(rng() % 3);
  toy.hours = 1 + static_cast<int>(rng() % 3);
  toy.demand.assign(toy.buses, std::vector<double>(toy.hours));
  for (auto& row : toy.demand)
    for (auto& d : row) d = std::round(uni(0.0, 10.0) * 100.0) / 100.0;

  auto avail = [&]() {
    std::vector<double> a(toy.hours);
    for (auto& x : a) x = std::round(uni(0.2, 1.0) * 100.0) / 100.0;
    return a;
  };
  for (int b = 0; b < toy.buses; ++b) {
    toy.gens.push_back({b, 1000.0, uni(400.0, 600.0), std::vector<double>(toy.hours, 1.0), 0.0, false});
    const int fixed = static_cast<int>(rng() % 2);
    for (int k = 0; k < fixed; ++k) toy.gens.push_back({b, uni(0.0, 8.0), uni(5.0, 80.0), avail(), 0.0, false});
  }
  for (int b = 1; b < toy.buses; ++b) toy.links.push_back({b, uni(0.8, 1.0), uni(0.0, 8.0), uni(0.0, 3.0), 0.0, false});

  const int extendables = 1 + static_cast<int>(rng() % 2);
  for (int e = 0; e < extendables; ++e) {
    const bool link = !toy.links.empty() && rng() % 3 == 0;
    if (link) {
      auto& l = toy.links[rng() % toy.links.size()];
      if (l.extendable) continue;
      l.extendable = true;
      l.capital = uni(2e4, 3e5);
    } else {
      toy.gens.push_back({static_cast<int>(rng() % toy.buses), 0.0, uni(0.0, 60.0), avail(), uni(2e4, 4e5), true});
    }
  }
  return toy;
}

Network toy_network(const Toy& toy) {
  Network net;
  net.name = "brute";
  net.carriers = {{"electricity", FlowUnit::MW}};
  net.snapshots = Snapshots::hourly(parse_timestamp("2022-01-01T00:00:00Z"), toy.hours);
  for (int b = 0; b < toy.buses; ++b) net.buses.push_back({fmt::format("b{}", b), "electricity"});
  for (std::size_t i = 0; i < toy.gens.size(); ++i) {
    const auto& g = toy.gens[i];
    Generator gen;
    gen.name = fmt::format("g{}", i);
    gen.bus = fmt::format("b{}", g.bus);
    gen.extendable = g.extendable;
    gen.fixed_capacity = g.cap;
    gen.capital_cost = g.capital;
    gen.marginal_cost = g.marginal;
    gen.availability_max = Profile(g.avail);
    net.generators.push_back(gen);
  }
  for (std::size_t i = 0; i < toy.links.size(); ++i) {
    const auto& l = toy.links[i];
    MultiLink link;
    link.name = fmt::format("l{}", i);
    link.bus0 = "b0";
    link.outputs = {{fmt::format("b{}", l.to), l.eff}};
    link.extendable = l.extendable;
    link.fixed_capacity = l.cap;
    link.capital_cost = l.capital;
    link.marginal_cost = l.marginal;
    net.links.push_back(link);
  }
  for (int b = 0; b < toy.buses; ++b)
    net.loads.push_back(Load{fmt::format("d{}", b), fmt::format("b{}", b), std::nullopt,
                             FixedSeries{Profile(toy.demand[b])}});
  return net;
}

// Golden-section search after a coarse grid; exact up to the tolerance for convex f.
double minimize_1d(const std::function<double(double)>& f, double lo, double hi, int grid, int iterations) {
  if (hi <= lo) return f(lo);
  double best_x = lo, best = f(lo);
  const double step = (hi - lo) / grid;
  for (int i = 1; i <= grid; ++i) {
    const double x = lo + step * i;
    const double v = f(x);
    if (v < best) best = v, best_x = x;
  }
  double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a), fd = f(d);
    }
  }
  return std::min({best, fc, fd});
}

struct Oracle {
  const Toy& toy;
  std::vector<double> gen_cap;
  std::vector<double> link_cap;
  double weight;  // N / 8760

  std::vector<std::vector<std::size_t>> merit;  // generator indices per bus, cheapest first

  explicit Oracle(const Toy& t) : toy(t), weight(t.hours / kHoursPerYear) {
    for (const auto& g : t.gens) gen_cap.push_back(g.cap);
    for (const auto& l : t.links) link_cap.push_back(l.cap);
    merit.resize(t.buses);
    for (std::size_t i = 0; i < t.gens.size(); ++i) merit[t.gens[i].bus].push_back(i);
    for (auto& m : merit)
      std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return t.gens[a].marginal < t.gens[b].marginal; });
  }

  // Merit-order cost of serving `x` at bus b in hour t.
  double greedy(int b, int t, double x) const {
    if (x < -1e-12) return std::numeric_limits<double>::infinity();
    double cost = 0.0, left = std::max(0.0, x);
    for (std::size_t i : merit[b]) {
      const double take = std::min(gen_cap[i] * toy.gens[i].avail[t], left);
      cost += toy.gens[i].marginal * take;
      left -= take;
      if (left <= 0.0) break;
    }
    return left > 1e-9 ? std::numeric_limits<double>::infinity() : cost;
  }

  double hour_cost(int t) const {
    const std::size_t n = toy.links.size();
    std::vector<double> flow(n, 0.0);
    auto total = [&]() {
      double c = 0.0, export0 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& l = toy.links[k];
        c += greedy(l.to, t, toy.demand[l.to][t] - l.eff * flow[k]) + l.marginal * flow[k];
        export0 += flow[k];
      }
      for (int b = 1; b < toy.buses; ++b) {
        bool linked = false;
        for (const auto& l : toy.links) linked |= l.to == b;
        if (!linked) c += greedy(b, t, toy.demand[b][t]);
      }
      return c + greedy(0, t, toy.demand[0][t] + export0);
    };
    auto upper = [&](std::size_t k) {
      return std::min(link_cap[k], toy.demand[toy.links[k].to][t] / toy.links[k].eff);
    };
    std::function<double(std::size_t)> over = [&](std::size_t k) -> double {
      if (k == n) return total();
      return minimize_1d([&](double f) { flow[k] = f; return over(k + 1); }, 0.0, upper(k), 2, 32);
    };
    return over(0);
  }

  double dispatch() const {
    double c = 0.0;
    for (int t = 0; t < toy.hours; ++t) c += hour_cost(t);
    return c;
  }

  double capital() const {
    double c = 0.0;
    for (std::size_t i = 0; i < toy.gens.size(); ++i)
      if (toy.gens[i].extendable) c += toy.gens[i].capital * gen_cap[i];
    for (std::size_t i = 0; i < toy.links.size(); ++i)
      if (toy.links[i].extendable) c += toy.links[i].capital * link_cap[i];
    return c * weight;
  }

  double solve() {
    std::vector<double*> vars;
    std::vector<double> bounds;
    double total_demand = 0.0;
    for (const auto& row : toy.demand) total_demand += *std::max_element(row.begin(), row.end());
    for (std::size_t i = 0; i < toy.gens.size(); ++i)
      if (toy.gens[i].extendable) {
        vars.push_back(&gen_cap[i]);
        const double amin = *std::min_element(toy.gens[i].avail.begin(), toy.gens[i].avail.end());
        bounds.push_back(total_demand / (0.8 * amin) + 1.0);
      }
    for (std::size_t i = 0; i < toy.links.size(); ++i)
      if (toy.links[i].extendable) {
        vars.push_back(&link_cap[i]);
        const auto& d = toy.demand[toy.links[i].to];
        bounds.push_back(*std::max_element(d.begin(), d.end()) / toy.links[i].eff + 1.0);
      }
    std::function<double(std::size_t)> over = [&](std::size_t k) -> double {
      if (k == vars.size()) return capital() + dispatch();
      return minimize_1d([&](double x) { *vars[k] = x; return over(k + 1); }, 0.0, bounds[k], 10, 36);
    };
    return over(0);
  }
};

Verdict criterion_brute_force(unsigned seed, std::vector<std::string>& kkt_failures, int& kkt_checked) {
  const auto start = Clock::now();
  std::mt19937 rng(seed);
  const int count = 24;
  int matched = 0;
  double worst = 0.0;
  std::string first_miss;
  for (int i = 0; i < count; ++i) {
    const Toy toy = random_toy(rng);
    const Network net = toy_network(toy);
    const LpProblem lp = assemble(net);
    const LpSolution sol = solve_reference(lp);
    if (sol.optimal()) {
      ++kkt_checked;
      if (!check_kkt(lp, sol).passed()) kkt_failures.push_back(fmt::format("toy {}", i));
    }
    Oracle oracle(toy);
    const double expected = oracle.solve();
    const double rel = std::abs(sol.objective - expected) / std::max(1.0, std::abs(expected));
    worst = std::max(worst, rel);
    if (sol.optimal() && rel <= 1e-4)
      ++matched;
    else if (first_miss.empty())
      first_miss = fmt::format(" first miss: toy {} lp {} oracle {}", i, sol.objective, expected);
  }
  const double elapsed = seconds_since(start);
  Verdict v{1};
  v.pass = matched == count && elapsed < 10.0;
  v.detail = fmt::format("{}/{} toys match brute force (worst rel {:.2e}, tol 1e-4), {:.2f} s (limit 10 s){}", matched,
                         count, worst, elapsed, first_miss);
  return v;
}

// ---------------------------------------------------------------------------
// Hub solves shared by criteria 2, 4, 6 and 7.

struct HubSolve {
  std::string label;
  ScenarioConfig config;
  Hub hub;
  LpProblem lp;
  LpSolution sol;
  CaseResult result;
};

HubSolve solve_hub(const ScenarioConfig& config, const Catalog& catalog, const MarketSeries& market) {
  HubSolve s;
  s.label = case_label(config);
  s.config = config;
  s.hub = build_hub(config, catalog, market);
  s.lp = assemble(s.hub.network);
  RunOptions run;
  run.solver = "external";
  s.sol = solve_with_min_build(s.hub.network, s.lp, run);
  s.result = make_case_result(s.hub.network, s.lp, s.sol);
  return s;
}

double value(const HubSolve& s, const std::string& column) { return s.sol.primal.at(s.lp.column_index(column)); }

double capacity(const HubSolve& s, const std::string& component) {
  auto it = s.result.capacities.find(component);
  return it == s.result.capacities.end() ? 0.0 : it->second;
}

// Spot price straddling the RFNBO threshold, with cheap grid power in eligible hours.
MarketSeries straddle_market(std::size_t hours) {
  MarketSeries m;
  m.snapshots = Snapshots::hourly(parse_timestamp("2022-03-01T00:00:00Z"), hours);
  const double offsets[] = {-45.0, 0.01, -0.01, 15.0, 0.0, 30.0, -40.0, 5.0};
  for (std::size_t t = 0; t < hours; ++t) {
    const double h = static_cast<double>(t % 24);
    m.spot.push_back(20.0 + offsets[t % 8]);
    m.ng.push_back(35.0);
    m.emission.push_back(0.02 + 0.01 * static_cast<double>(t % 4));
    m.dk1_demand.push_back(2200.0 + 80.0 * h);
    m.dh_demand.push_back(14.0 + static_cast<double>(t % 5));
    m.wind_cf.push_back(0.05 + 0.5 * static_cast<double>((t * 5) % 7) / 6.0);
    m.solar_cf.push_back(h >= 8 && h <= 16 ? 0.4 : 0.0);
  }
  return m;
}

Verdict criterion_rfnbo(const HubSolve& s, const MarketSeries& market) {
  Verdict v{4};
  if (!s.sol.optimal()) {
    v.detail = "hub slice not optimal: " + s.sol.message;
    return v;
  }
  std::size_t blocked = 0, violations = 0, eligible_used = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < market.spot.size(); ++t) {
    const double f = value(s, lpnames::dispatch(hub::grid_to_el3, t));
    if (market.spot[t] > 20.0) {
      ++blocked;
      worst = std::max(worst, std::abs(f));
      if (f != 0.0) ++violations;
    } else if (f > 1e-6) {
      ++eligible_used;
    }
  }
  v.pass = violations == 0 && blocked > 0 && eligible_used > 0;
  v.detail = fmt::format("{} hours above 20 EUR/MWh, {} with nonzero grid->El3 flow (max {:.3g}); grid->El3 used in {} "
                         "eligible hours",
                         blocked, violations, worst, eligible_used);
  return v;
}

// ---------------------------------------------------------------------------

Verdict criterion_kkt(const std::vector<const HubSolve*>& hubs, int toy_checked,
                      const std::vector<std::string>& toy_failures, const Catalog& catalog) {
  Verdict v{2};
  std::vector<std::string> problems = toy_failures;
  int checked = toy_checked;
  for (const HubSolve* s : hubs) {
    if (!s->sol.optimal()) continue;
    ++checked;
    const KktReport k = check_kkt(s->lp, s->sol);
    if (!k.passed()) problems.push_back(s->label + " kkt");
    const DualityAudit a = duality_audit(s->hub.network, s->lp, s->sol);
    if (!a.passed()) problems.push_back(s->label + " audit");
  }

  // Closed systems: every cost is recovered by the value of the loads.
  double worst_closed = 0.0;
  int closed = 0;
  for (int variant = 0; variant < 3; ++variant) {
    Network net;
    net.name = "closed";
    net.carriers = {{"electricity", FlowUnit::MW}, {"H2", FlowUnit::MW}, {"heat", FlowUnit::MW}};
    net.snapshots = Snapshots::hourly(parse_timestamp("2022-01-01T00:00:00Z"), 24);
    net.buses = {{"el", "electricity"}, {"h2", "H2"}, {"lt", "heat"}};
    std::vector<double> cf(24);
    for (std::size_t t = 0; t < 24; ++t) cf[t] = 0.15 + 0.8 * static_cast<double>((t * 7 + variant) % 11) / 10.0;
    Generator wind;
    wind.name = "wind";
    wind.bus = "el";
    wind.extendable = true;
    wind.capital_cost = annualized_cost(catalog.at("onshore_wind"), 0.07);
    wind.marginal_cost = 1.35;
    wind.availability_max = Profile(cf);
    net.generators.push_back(wind);
    MultiLink ely;
    ely.name = "electrolysis";
    ely.bus0 = "el";
    ely.outputs = {{"h2", 0.622}, {"lt", 0.223}};
    ely.extendable = true;
    ely.capital_cost = annualized_cost(catalog.at("electrolysis_100mw"), 0.07);
    net.links.push_back(ely);
    MultiLink dump;
    dump.name = "heat_dump";
    dump.bus0 = "lt";
    dump.extendable = true;
    net.links.push_back(dump);
    MultiLink curtail;
    curtail.name = "curtail";
    curtail.bus0 = "el";
    curtail.extendable = true;
    net.links.push_back(curtail);
    Store tank;
    tank.name = "h2_tank";
    tank.bus = "h2_store";
    tank.extendable = true;
    tank.capital_cost = 1000.0 * (1 + variant);
    net.buses.push_back({"h2_store", "H2"});
    MultiLink in{.name = "tank_in", .bus0 = "h2", .outputs = {{"h2_store", 1.0}}};
    in.extendable = true;
    MultiLink out{.name = "tank_out", .bus0 = "h2_store", .outputs = {{"h2", 1.0}}};
    out.extendable = true;
    net.stores.push_back(tank);
    net.links.push_back(in);
    net.links.push_back(out);
    net.loads.push_back(Load{"h2_demand", "h2", std::nullopt, AnnualTotal{50000.0 * (1 + variant)}});
    const LpProblem lp = assemble(net);
    const LpSolution sol = solve_reference(lp);
    if (!sol.optimal()) {
      problems.push_back(fmt::format("closed toy {} not optimal", variant));
      continue;
    }
    ++checked;
    ++closed;
    if (!check_kkt(lp, sol).passed()) problems.push_back(fmt::format("closed toy {} kkt", variant));
    const DualityAudit a = duality_audit(net, lp, sol);
    const double rel = std::abs(a.objective - a.load_value) / std::max(1.0, std::abs(a.objective));
    worst_closed = std::max(worst_closed, rel);
    if (rel > 1e-6 || !a.passed()) problems.push_back(fmt::format("closed toy {} recovery {:.2e}", variant, rel));
  }
  v.pass = problems.empty() && closed == 3;
  v.detail = fmt::format("{} optimal solutions pass stationarity/feasibility/complementarity at 1e-6; closed-system "
                         "cost recovery worst rel {:.2e} (tol 1e-6)",
                         checked, worst_closed);
  if (!problems.empty()) v.detail += "; failures: " + problems.front();
  return v;
}

Verdict criterion_catalog(const Catalog& catalog) {
  Verdict v{3};
  int rows = 0, bad = 0;
  double worst = 0.0;
  for (const auto& row : cost_table::kCostTable) {
    const auto& r = catalog.at(row.key);
    const double scale = r.investment_unit == "MEUR" ? 1e6 : 1e3;
    const int life = static_cast<int>(std::isnan(row.lifetime) ? r.lifetime_years() : row.lifetime);
    const double om = std::isnan(row.fixed_om) ? 0.0 : row.fixed_om;
    const double expected = cost_table::oracle_annuity(row.investment * scale, life, 0.07, om);
    const double rel = std::abs(annualized_cost(r, 0.07) - expected) / expected;
    worst = std::max(worst, rel);
    ++rows;
    if (rel > 1e-9) ++bad;
  }
  const double wind = annualized_cost(catalog.at("onshore_wind"), 0.07) / 1e3;
  const bool wind_ok = std::abs(wind - 96.50) < 0.005;
  v.pass = bad == 0 && wind_ok;
  v.detail = fmt::format("{} rows, worst rel {:.2e} (tol 1e-9); wind {:.4f} kEUR/MW/y (expect 96.50)", rows, worst, wind);
  return v;
}

Verdict criterion_external_demand(const Catalog& catalog, const MarketSeries& market) {
  Verdict v{5};
  double worst = 0.0;
  std::string parts;
  for (double re : {0.1, 0.5, 1.0}) {
    ScenarioConfig c;
    c.max_re = re;
    const Hub hub = build_hub(c, catalog, market);
    const auto& d = std::get<FixedSeries>(hub.network.find_load(hub::dk1_load)->kind).demand.values();
    const double annual = std::accumulate(d.begin(), d.end(), 0.0) * market.snapshots.horizon_weight();
    const double h2 = c.h2_grid_demand * 1e3;
    const double expected = (h2 / alpha_h2(catalog) + hub.meoh_demand / alpha_meoh(catalog)) * re;
    const double rel = std::abs(annual - expected) / expected;
    worst = std::max(worst, rel);
    parts += fmt::format(" {}:{:.1f}", re, annual);
  }
  v.pass = worst <= 1e-9;
  v.detail = fmt::format("annual external demand [MWh] at maxRE{}; worst rel {:.2e} (tol 1e-9)", parts, worst);
  return v;
}

Verdict criterion_operations(const std::vector<const HubSolve*>& hubs) {
  Verdict v{6};
  int cases = 0;
  std::vector<std::string> problems;
  double worst_min = 0.0, worst_ramp = 0.0, worst_c = 0.0;
  const double tol = 1e-6;
  for (const HubSolve* s : hubs) {
    if (!s->sol.optimal()) continue;
    ++cases;
    const std::size_t n = s->hub.network.snapshots.size();
    const double F = capacity(*s, hub::meoh_synthesis);
    for (std::size_t t = 0; t < n; ++t) {
      const double f = value(*s, lpnames::dispatch(hub::meoh_synthesis, t));
      worst_min = std::max(worst_min, 0.2 * F - f);
      if (f < 0.2 * F - tol * std::max(1.0, F)) problems.push_back(fmt::format("{} MeOH min-load t={}", s->label, t));
      if (t > 0) {
        const double step = std::abs(f - value(*s, lpnames::dispatch(hub::meoh_synthesis, t - 1)));
        worst_ramp = std::max(worst_ramp, step - F / 48.0);
        if (step > F / 48.0 + tol * std::max(1.0, F))
          problems.push_back(fmt::format("{} MeOH ramp t={}", s->label, t));
      }
    }
    const double E = capacity(*s, hub::battery);
    for (const char* link : {hub::battery_charger, hub::battery_discharger}) {
      const double cap = capacity(*s, link);
      worst_c = std::max(worst_c, cap - E);
      if (cap > E + tol * std::max(1.0, E)) problems.push_back(fmt::format("{} {} C-rate", s->label, link));
      for (std::size_t t = 0; t < n; ++t)
        if (value(*s, lpnames::dispatch(link, t)) > E + tol * std::max(1.0, E))
          problems.push_back(fmt::format("{} {} C-rate t={}", s->label, link, t));
    }
    for (const char* link : {hub::co2_liquefaction, hub::co2_evaporator}) {
      const double cap = capacity(*s, link);
      if (cap > 1e-6 && (cap < 1.0 - tol || cap > 15.0 + tol))
        problems.push_back(fmt::format("{} {} rate {:.4f} t/h", s->label, link, cap));
    }
  }
  v.pass = cases > 0 && problems.empty();
  v.detail = fmt::format("{} solved hub cases; MeOH min-load slack {:.2e}, ramp excess {:.2e}, battery C-rate excess "
                         "{:.2e}; liquid CO2 rates within [1, 15] t/h",
                         cases, worst_min, worst_ramp, worst_c);
  if (!problems.empty()) v.detail += fmt::format("; {} violations, first: {}", problems.size(), problems.front());
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 7: trends on four representative weeks.

struct TrendRun {
  std::vector<HubSolve> solves;
  double max_seconds = 0.0;
};

const std::vector<int> kWeeks{1, 14, 27, 40};

ScenarioConfig trend_config(ScenarioKind kind, int year, double recovery, double max_re) {
  ScenarioConfig c;
  c.name = "acceptance";
  c.scenario = kind;
  c.price_year = year;
  c.co2_recovery_ratio = recovery;
  c.max_re = max_re;
  c.horizon.weeks = kWeeks;
  return c;
}

Verdict criterion_trends(TrendRun& run, const Catalog& catalog) {
  Verdict v{7};
  auto solve = [&](const ScenarioConfig& c) -> const HubSolve& {
    const auto start = Clock::now();
    run.solves.push_back(solve_hub(c, catalog, load_case_market(c)));
    const double secs = seconds_since(start);
    run.max_seconds = std::max(run.max_seconds, secs);
    const auto& s = run.solves.back();
    fmt::print("  {} {} {:.1f} s LCOH {} LCOM {}\n", s.label, to_string(s.sol.status), secs,
               s.result.lcoh ? fmt::format("{:.3f}", *s.result.lcoh) : "-",
               s.result.lcom ? fmt::format("{:.3f}", *s.result.lcom) : "-");
    std::fflush(stdout);
    return s;
  };
  run.solves.reserve(9);
  const double slack = 1e-6;
  std::vector<std::string> problems;

  std::vector<double> lcom_rec;
  for (double rec : {0.80, 0.85, 0.90, 0.95, 0.99}) {
    const auto& s = solve(trend_config(ScenarioKind::H2ToGrid, 2019, rec, 0.5));
    lcom_rec.push_back(s.result.lcom.value_or(std::nan("")));
  }
  for (std::size_t i = 1; i < lcom_rec.size(); ++i)
    if (!(lcom_rec[i] >= lcom_rec[i - 1] * (1.0 - slack))) problems.push_back("LCOM decreases with recovery");

  const auto& standalone = solve(trend_config(ScenarioKind::MeOHStandalone, 2019, 0.90, 0.5));
  const double lcom_sa = standalone.result.lcom.value_or(std::nan(""));
  if (!(lcom_sa > lcom_rec[2])) problems.push_back("standalone LCOM not above integrated");

  std::vector<double> lcoh_re, lcom_re;
  for (double re : {0.1, 0.5, 1.0}) {
    const auto& s = solve(trend_config(ScenarioKind::H2ToGrid, 2022, 0.90, re));
    lcoh_re.push_back(s.result.lcoh.value_or(std::nan("")));
    lcom_re.push_back(s.result.lcom.value_or(std::nan("")));
  }
  for (std::size_t i = 1; i < lcoh_re.size(); ++i) {
    if (!(lcoh_re[i] <= lcoh_re[i - 1] * (1.0 + slack))) problems.push_back("LCOH increases with maxRE (2022)");
    if (!(lcom_re[i] <= lcom_re[i - 1] * (1.0 + slack))) problems.push_back("LCOM increases with maxRE (2022)");
  }
  for (const auto& s : run.solves)
    if (!s.result.optimal()) problems.push_back(s.label + " not optimal");
  if (run.max_seconds >= 300.0) problems.push_back("case above 5 min");

  auto join = [](const std::vector<double>& xs) {
    std::string s;
    for (double x : xs) s += fmt::format("{}{:.2f}", s.empty() ? "" : "/", x);
    return s;
  };
  v.pass = problems.empty();
  v.detail = fmt::format("N={} external solver; LCOM vs recovery 0.80..0.99 {}; standalone {:.2f} vs integrated {:.2f}; "
                         "2022 maxRE 0.1/0.5/1 LCOH {} LCOM {}; slowest case {:.0f} s (limit 300 s)",
                         run.solves.empty() ? 0 : run.solves.front().hub.network.snapshots.size(), join(lcom_rec),
                         lcom_sa, lcom_rec[2], join(lcoh_re), join(lcom_re), run.max_seconds);
  if (!problems.empty()) v.detail += "; " + problems.front();
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  unsigned seed = 20240917;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      quick = true;
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      seed = static_cast<unsigned>(std::stoul(argv[++i]));
    } else {
      fmt::print(stderr, "usage: acceptance [--quick] [--seed N]\n");
      return 2;
    }
  }

  const Catalog catalog = load_catalog(default_catalog_path());
  std::vector<Verdict> verdicts;

  std::vector<std::string> toy_kkt_failures;
  int toy_kkt_checked = 0;
  const Verdict brute = criterion_brute_force(seed, toy_kkt_failures, toy_kkt_checked);
  fmt::print("  brute force: {}\n", brute.detail);

  const MarketSeries straddle = straddle_market(48);
  ScenarioConfig slice_cfg;
  slice_cfg.name = "rfnbo_slice";
  const HubSolve slice = solve_hub(slice_cfg, catalog, straddle);

  TrendRun trends;
  Verdict trend_verdict{7};
  if (!quick) trend_verdict = criterion_trends(trends, catalog);

  std::vector<const HubSolve*> hubs{&slice};
  for (const auto& s : trends.solves) hubs.push_back(&s);

  verdicts.push_back(brute);
  verdicts.push_back(criterion_kkt(hubs, toy_kkt_checked, toy_kkt_failures, catalog));
  verdicts.push_back(criterion_catalog(catalog));
  verdicts.push_back(criterion_rfnbo(slice, straddle));
  verdicts.push_back(criterion_external_demand(catalog, straddle));
  verdicts.push_back(criterion_operations(hubs));
  if (quick) {
    trend_verdict.pass = false;
    trend_verdict.waived = true;
    trend_verdict.detail = "skipped (--quick)";
  }
  verdicts.push_back(trend_verdict);
  verdicts.push_back(Verdict{8, false, true,
                             "waived: measured Danish spot prices and Skive capacity factors are not shipped; the "
                             "bundled series are synthetic"});

  fmt::print("\n");
  bool ok = true;
  for (const auto& v : verdicts) {
    report(v);
    if (!v.waived && !v.pass) ok = false;
  }
  if (quick) ok = false;  // a partial run is never an acceptance
  fmt::print("acceptance: {}\n", ok ? "PASS" : (quick ? "PARTIAL" : "FAIL"));
  return ok ? 0 : 1;
}
