#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numeric>

#include "hubopt/catalog.hpp"
#include "hubopt/results.hpp"
#include "toys.hpp"

using namespace hubopt;

namespace {

struct Solved {
  Network net;
  LpProblem lp;
  LpSolution sol;
};

Solved solve(Network net) {
  Solved s{std::move(net), {}, {}};
  s.lp = assemble(s.net);
  s.sol = solve_reference(s.lp);
  REQUIRE(s.sol.optimal());
  return s;
}

/// One extendable generator serving a flat annual load of 1 MW.
Network single_technology(std::size_t hours, double annual_total = kHoursPerYear) {
  auto net = toys::empty_network(hours);
  net.buses = {{"el", "electricity"}};
  auto g = toys::generator("plant", "el", 10.0, true, 0.0, 80000.0);
  g.group = "renewables";
  net.generators.push_back(g);
  net.loads.push_back(toys::annual_load("H2_demand", "el", annual_total));
  return net;
}

/// Extendable PV serving a local load and selling up to `sale_cap` MW to an external grid at `price`.
Network with_sales(double demand, double sale_cap, double capital, double price) {
  auto net = toys::empty_network(3);
  net.buses = {{"el", "electricity"}, {"grid", "electricity"}};
  auto pv = toys::generator("pv", "el", 0.0, true, 0.0, capital);
  pv.group = "renewables";
  net.generators.push_back(pv);
  auto slack = toys::generator("grid_slack", "grid", 0.0, false, 1e4);
  slack.group = "external";
  net.generators.push_back(slack);
  MultiLink sell;
  sell.name = "sale";
  sell.bus0 = "el";
  sell.outputs = {{"grid", 1.0}};
  sell.extendable = true;
  sell.marginal_cost = -price;
  sell.group = "renewables";
  sell.external_trade = true;
  net.links.push_back(sell);
  net.loads.push_back(toys::fixed_load("local", "el", demand));
  net.loads.push_back(toys::fixed_load("grid_demand", "grid", sale_cap));
  return net;
}

}  // namespace

TEST_CASE("nearest-rank quantiles") {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(nearest_rank(v, 0.05) == 1.0);
  CHECK(nearest_rank(v, 0.5) == 5.0);
  CHECK(nearest_rank(v, 0.51) == 6.0);
  CHECK(nearest_rank(v, 0.95) == 10.0);
  CHECK(nearest_rank(v, 1.0) == 10.0);
  CHECK(nearest_rank({7.0}, 0.25) == 7.0);
  CHECK_THROWS_AS(nearest_rank({}, 0.5), InputError);
}

TEST_CASE("levelized cost of a single technology") {
  const auto s = solve(single_technology(24));
  CHECK(levelized_cost(s.lp, s.sol, "H2_demand") == doctest::Approx(80000.0 / 8760.0 + 10.0).epsilon(1e-9));
  CHECK(levelized_cost(s.lp, s.sol, "H2_demand") == doctest::Approx(19.13).epsilon(2e-4));
  CHECK(levelized_costs(s.lp, s.sol).size() == 1);
  CHECK_THROWS_AS(levelized_cost(s.lp, s.sol, "MeOH_demand"), InputError);
}

TEST_CASE("zero demand has zero levelized cost") {
  const auto s = solve(single_technology(4, 0.0));
  CHECK(s.sol.objective == 0.0);
  CHECK(levelized_cost(s.lp, s.sol, "H2_demand") == 0.0);
}

TEST_CASE("constant price gives equal quantiles") {
  auto net = toys::one_gen_one_load(6);
  net.generators[0].group = "external";
  const auto s = solve(net);
  const auto st = shadow_stats(s.lp, s.sol, "el");
  CHECK(st.mean == doctest::Approx(10.0));
  CHECK(st.min == doctest::Approx(10.0));
  CHECK(st.max == doctest::Approx(10.0));
  REQUIRE(st.quantiles.size() == std::size(kQuantileLevels));
  for (double q : st.quantiles) CHECK(q == doctest::Approx(10.0));
  CHECK_THROWS_AS(shadow_stats(s.lp, s.sol, "nowhere"), InputError);
}

TEST_CASE("closed system recovers its cost exactly") {
  const auto s = solve(single_technology(24));
  const auto b = cost_breakdown(s.net, s.lp, s.sol);
  const double w = kHoursPerYear / 24.0;
  CHECK(b.total == doctest::Approx(s.sol.objective * w).epsilon(1e-12));
  CHECK(b.capital == doctest::Approx(80000.0));
  CHECK(b.marginal == doctest::Approx(10.0 * kHoursPerYear));
  CHECK(std::abs(b.total_with_ptx_sales) <= 1e-6 * b.total);
  REQUIRE(b.groups.size() == 1);
  CHECK(b.groups[0].group == "renewables");

  const auto a = duality_audit(s.net, s.lp, s.sol);
  CHECK(a.passed());
  CHECK(a.relative_residual <= 1e-9);
  CHECK(a.load_values.at("H2_demand") == doctest::Approx(a.objective).epsilon(1e-9));
  CHECK(a.capacity_rents == 0.0);
  CHECK(a.imbalances.size() == 1);
  CHECK(a.imbalances[0].max_abs <= 1e-9);
}

TEST_CASE("exogenous sales reconcile with trade cashflows") {
  const double d = 2.0, sale = 3.0, capital = 50000.0, price = 20.0;
  const auto s = solve(with_sales(d, sale, capital, price));
  // Selling pays while the price beats the hourly capital charge, so every sellable MW is built.
  REQUIRE(price > capital / kHoursPerYear);
  const double expected = capital * (d + sale) - price * sale * kHoursPerYear;
  const auto a = duality_audit(s.net, s.lp, s.sol);
  CHECK(a.passed());
  CHECK(a.objective == doctest::Approx(expected).epsilon(1e-9));
  CHECK(a.external_trade == doctest::Approx(-price * sale * kHoursPerYear).epsilon(1e-9));
  CHECK(a.load_value + a.capacity_rents + a.bound_rents == doctest::Approx(a.objective).epsilon(1e-9));
  CHECK(a.load_values.at("local") == doctest::Approx(capital * d).epsilon(1e-9));
  CHECK(a.load_values.at("grid_demand") == doctest::Approx((capital / kHoursPerYear - price) * sale * kHoursPerYear));

  const auto b = cost_breakdown(s.net, s.lp, s.sol);
  CHECK(b.external_trade == doctest::Approx(a.external_trade));
  CHECK(b.total == doctest::Approx(expected));
  double sum = 0.0;
  for (const auto& g : b.groups) sum += g.capital + g.marginal;
  CHECK(sum == doctest::Approx(b.total).epsilon(1e-12));
}

TEST_CASE("corrupted solutions are flagged") {
  auto s = solve(single_technology(6));
  LpSolution bad = s.sol;
  bad.primal[s.lp.column_index(lpnames::delivery("H2_demand", 2))] += 0.5;
  auto a = duality_audit(s.net, s.lp, bad);
  CHECK_FALSE(a.passed());
  CHECK(a.imbalances[0].bus == "el");
  CHECK(a.imbalances[0].worst_snapshot == 2);

  bad = s.sol;
  bad.duals[s.lp.row_index(lpnames::annual_demand("H2_demand"))] *= 1.1;
  a = duality_audit(s.net, s.lp, bad);
  CHECK_FALSE(a.passed());
  CHECK(a.relative_residual > 1e-3);

  bad = s.sol;
  bad.status = SolveStatus::Infeasible;
  CHECK_FALSE(duality_audit(s.net, s.lp, bad).passed());
}

TEST_CASE("breakdown requires a group on every priced component") {
  auto net = single_technology(4);
  net.generators[0].group.clear();
  const auto s = solve(net);
  CHECK_THROWS_WITH_AS(cost_breakdown(s.net, s.lp, s.sol), doctest::Contains("plant"), InputError);
}

TEST_CASE("case result tables and JSON round trip") {
  const auto s = solve(with_sales(1.0, 2.0, 40000.0, 15.0));
  CaseResult r = make_case_result(s.net, s.lp, s.sol);
  r.scenario = {{"name", "toy"}};
  CHECK(r.optimal());
  CHECK(r.solver.kkt_passed);
  CHECK(r.capacities.at("pv") == doctest::Approx(3.0));
  CHECK(r.capacities.at("grid_slack") == 1e4);
  CHECK(r.annual_flows.at("sale") == doctest::Approx(2.0 * kHoursPerYear));
  CHECK_FALSE(r.lcoh.has_value());
  CHECK(r.prices.size() == 2);
  CHECK(r.hourly_prices.at("el").size() == 3);
  CHECK(r.timestamps.front() == "2022-01-01T00:00:00Z");

  const auto back = case_result_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(to_json(back) == to_json(r));

  CHECK(capacities_csv(r).rfind("component,group,capacity,annual_flow\n", 0) == 0);
  CHECK(prices_csv(r).rfind("bus,mean,min,max,q05,q25,q50,q75,q95\n", 0) == 0);
  CHECK(breakdown_csv(r).find("\ntotal,") != std::string::npos);
  CHECK(duals_csv(r).rfind("snapshot,timestamp,el,grid\n", 0) == 0);
  const std::string duals = duals_csv(r);
  CHECK(std::count(duals.begin(), duals.end(), '\n') == 4);

  const auto dir = std::filesystem::temp_directory_path() / "hubopt_results_test";
  std::filesystem::remove_all(dir);
  write_case_result(dir.string(), r);
  for (const char* f : {ResultFiles::result, ResultFiles::capacities, ResultFiles::prices, ResultFiles::breakdown,
                        ResultFiles::duals})
    CHECK(std::filesystem::exists(dir / f));
  CHECK(to_json(read_case_result(dir.string())) == to_json(r));
  std::filesystem::remove_all(dir);
}

TEST_CASE("non-optimal solutions keep only solver metadata") {
  auto net = single_technology(3);
  net.generators[0].extendable = false;
  net.generators[0].fixed_capacity = 0.1;
  const auto lp = assemble(net);
  const auto sol = solve_reference(lp);
  REQUIRE(sol.status == SolveStatus::Infeasible);
  const auto r = make_case_result(net, lp, sol);
  CHECK_FALSE(r.optimal());
  CHECK(r.capacities.empty());
  CHECK(r.solver.status == SolveStatus::Infeasible);
  CHECK(to_string(case_result_from_json(to_json(r)).solver.status) == "infeasible");
}

TEST_CASE("hub slice: costs, price window and audit") {
  const Catalog cat = load_catalog(default_catalog_path());
  ScenarioConfig cfg;
  cfg.horizon.hours = 72;
  auto market = toys::daily_market(72);
  // Weak wind keeps sales under the external-demand cap so the hub trades both ways.
  for (auto& w : market.wind_cf) w *= 0.3;
  const Hub hub = build_hub(cfg, cat, market);
  const auto lp = assemble(hub.network);
  const auto sol = solve_external(lp);
  REQUIRE(sol.optimal());
  const auto r = make_case_result(hub.network, lp, sol);
  CHECK(r.solver.kkt_passed);
  CHECK(r.audit.passed());
  REQUIRE(r.lcoh.has_value());
  REQUIRE(r.lcom.has_value());
  CHECK(*r.lcoh >= 0.0);
  CHECK(*r.lcom >= 0.0);
  CHECK(*r.lcom > *r.lcoh);

  double sum = 0.0;
  for (const auto& g : r.breakdown.groups) sum += g.capital + g.marginal;
  CHECK(std::abs(sum - r.breakdown.total) <= 1e-6 * std::abs(r.breakdown.total));
  CHECK(r.breakdown.total == doctest::Approx(sol.objective * kHoursPerYear / 72.0).epsilon(1e-9));

  const auto buy = purchase_price(market, cfg.co2_tax);
  const auto sell = sale_price(market);
  const double mean_buy = std::accumulate(buy.begin(), buy.end(), 0.0) / 72.0;
  const double mean_sell = std::accumulate(sell.begin(), sell.end(), 0.0) / 72.0;
  const auto el = shadow_stats(lp, sol, hub::el2);
  CHECK(el.mean >= mean_sell);
  CHECK(el.mean <= mean_buy);

  // Hour by hour: grid purchase caps the internal price unless the connection is full.
  const auto lambda = shadow_prices(lp, sol, hub::el2);
  const double cap = r.capacities.at(hub::grid_to_el2);
  for (std::size_t t = 0; t < 72; ++t) {
    const double flow = sol.primal[lp.column_index(lpnames::dispatch(hub::grid_to_el2, t))];
    if (flow < cap - 1e-6) CHECK(lambda[t] <= buy[t] + 1e-6);
  }
  // Surplus biogenic CO2 is vented, so low-pressure CO2 is worth almost nothing.
  CHECK(std::abs(shadow_stats(lp, sol, hub::co2_lp).mean) < 1.0);
}
