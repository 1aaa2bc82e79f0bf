#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "hubopt/netcore.hpp"
#include "toys.hpp"

using namespace hubopt;

namespace {

bool has_message(const std::vector<Violation>& report, const std::string& needle) {
  for (const auto& v : report)
    if (v.message.find(needle) != std::string::npos) return true;
  return false;
}

Network two_bus_network() {
  auto net = toys::empty_network(3);
  net.buses = {{"el", "electricity"}, {"h2", "H2"}};
  net.generators.push_back(toys::generator("wind", "el", 0.0, true, 0.0, 1000.0));
  MultiLink ely;
  ely.name = "electrolysis";
  ely.bus0 = "el";
  ely.outputs = {{"h2", 0.622}};
  ely.extendable = true;
  net.links.push_back(ely);
  net.loads.push_back(toys::fixed_load("h2_load", "h2", 1.0));
  return net;
}

}  // namespace

TEST_CASE("valid two-bus network has an empty report") { CHECK(validate_network(two_bus_network()).empty()); }

TEST_CASE("dangling link output bus is reported once") {
  auto net = two_bus_network();
  net.links[0].outputs.push_back({"nowhere", 0.5});
  const auto report = validate_network(net);
  REQUIRE(report.size() == 1);
  CHECK(report[0].component == "electrolysis");
  CHECK(report[0].message.find("unknown bus") != std::string::npos);
}

TEST_CASE("availability above one is reported") {
  auto net = two_bus_network();
  net.generators[0].availability_max = Profile(std::vector<double>{0.5, 1.2, 0.3});
  CHECK(has_message(validate_network(net), "availability > 1"));
}

TEST_CASE("other structural violations") {
  SUBCASE("duplicate component names") {
    auto net = two_bus_network();
    net.generators.push_back(toys::generator("electrolysis", "el", 1.0));
    CHECK(has_message(validate_network(net), "duplicate component name"));
  }
  SUBCASE("series length mismatch") {
    auto net = two_bus_network();
    net.generators[0].marginal_cost = Profile(std::vector<double>{1.0, 2.0});
    CHECK(has_message(validate_network(net), "length 2"));
  }
  SUBCASE("carrier mismatch") {
    auto net = two_bus_network();
    net.generators[0].carrier = "H2";
    CHECK(has_message(validate_network(net), "carrier mismatch"));
  }
  SUBCASE("min load out of range") {
    auto net = two_bus_network();
    net.links[0].min_load = 1.0;
    CHECK(has_message(validate_network(net), "min_load"));
  }
  SUBCASE("two stores on one bus") {
    auto net = two_bus_network();
    net.stores.push_back(Store{"s1", "h2", "", std::nullopt, true});
    net.stores.push_back(Store{"s2", "h2", "", std::nullopt, true});
    CHECK(has_message(validate_network(net), "more than one store"));
  }
  SUBCASE("irregular snapshots") {
    auto net = two_bus_network();
    net.snapshots = Snapshots({toys::jan1(), toys::jan1() + std::chrono::hours(2)});
    CHECK(has_message(validate_network(net), "spacing"));
  }
}

TEST_CASE("balance signature follows the input convention") {
  auto net = two_bus_network();
  const auto el = carrier_balance_signature(net, "el");
  REQUIRE(el.size() == 2);
  CHECK(el[0] == BalanceTerm{"wind", TermKind::Generator, 1, 1.0, 0});
  CHECK(el[1] == BalanceTerm{"electrolysis", TermKind::Link, -1, 1.0, 0});
  const auto h2 = carrier_balance_signature(net, "h2");
  REQUIRE(h2.size() == 1);
  CHECK(h2[0].sign == 1);
  CHECK(h2[0].coefficient == doctest::Approx(0.622));
  CHECK_THROWS_AS(carrier_balance_signature(net, "missing"), InputError);
}

TEST_CASE("heat pump output appears on the district heating bus") {
  auto net = toys::empty_network(1);
  net.buses = {{"el", "electricity"}, {"lt", "heat"}, {"dh", "heat"}};
  MultiLink hp;
  hp.name = "heat_pump";
  hp.bus0 = "el";
  hp.outputs = {{"lt", -1.7}, {"dh", 2.7}};
  net.links.push_back(hp);
  const auto dh = carrier_balance_signature(net, "dh");
  REQUIRE(dh.size() == 1);
  CHECK(dh[0].coefficient == doctest::Approx(2.7));
  const auto lt = carrier_balance_signature(net, "lt");
  CHECK(lt[0].sign == -1);
}

TEST_CASE("store terms lag and wrap") {
  auto net = toys::empty_network(3);
  net.buses = {{"h2", "H2"}};
  Store st;
  st.name = "tank";
  st.bus = "h2";
  st.standing_loss = 0.01;
  net.stores.push_back(st);
  auto sig0 = carrier_balance_signature(net, "h2", 0);
  REQUIRE(sig0.size() == 2);
  CHECK(sig0[1].lag == 1);
  CHECK(sig0[1].coefficient == doctest::Approx(0.99));
  net.stores[0].cyclic = false;
  CHECK(carrier_balance_signature(net, "h2", 0).size() == 1);
  CHECK(carrier_balance_signature(net, "h2", 1).size() == 2);
}

TEST_CASE("annual demand is prorated to the horizon") {
  const Load h2 = toys::annual_load("h2", "h2", 272000.0);
  CHECK(annual_demand_total(h2, Snapshots::hourly(toys::jan1(), 8760)) == doctest::Approx(272000.0));
  CHECK(annual_demand_total(h2, Snapshots::hourly(toys::jan1(), 876)) == doctest::Approx(27200.0));
  CHECK(annual_demand_total(toys::annual_load("z", "h2", 0.0), Snapshots::hourly(toys::jan1(), 24)) == 0.0);
  CHECK_THROWS_AS(annual_demand_total(toys::fixed_load("f", "el", 1.0), Snapshots::hourly(toys::jan1(), 2)),
                  InputError);
}

TEST_CASE("timestamps round trip and reject offsets") {
  const auto t = parse_timestamp("2019-03-31T01:00:00Z");
  CHECK(format_timestamp(t) == "2019-03-31T01:00:00Z");
  CHECK_THROWS_AS(parse_timestamp("2019-03-31T01:00:00+02:00"), InputError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), InputError);
}

TEST_CASE("json round trip preserves randomly generated networks") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    auto net = toys::empty_network(n);
    net.buses = {{"a", "electricity"}, {"b", "H2"}};
    Generator g = toys::generator("g", "a", u(rng) * 50, rng() % 2 == 0, u(rng) * 10, u(rng) * 1e5);
    std::vector<double> cf(n);
    for (auto& v : cf) v = u(rng);
    g.availability_max = Profile(cf);
    if (rng() % 2) g.potential = u(rng) * 100;
    if (rng() % 2) g.ramp_up = u(rng);
    net.generators.push_back(g);
    MultiLink l;
    l.name = "l";
    l.bus0 = "a";
    l.outputs = {{"b", u(rng)}};
    l.min_load = 0.5 * u(rng);
    if (rng() % 2) l.min_build = 1.0;
    net.links.push_back(l);
    Store s;
    s.name = "s";
    s.bus = "b";
    s.cyclic = rng() % 2 == 0;
    s.standing_loss = 0.1 * u(rng);
    net.stores.push_back(s);
    net.loads.push_back(toys::annual_load("d", "b", u(rng) * 1000));
    const Network back = network_from_json(to_json(net));
    CHECK(to_json(back) == to_json(net));
    CHECK(validate_network(back) == validate_network(net));
  }
}

TEST_CASE("malformed json raises InputError") {
  CHECK_THROWS_AS(network_from_json(nlohmann::json::parse(R"({"schema": "hubopt-network/1"})")), InputError);
}
