#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "hubopt/catalog.hpp"
#include "cost_table.hpp"
#include "toys.hpp"

using namespace hubopt;
using namespace cost_table;

namespace {

const Catalog& catalog() {
  static const Catalog cat = load_catalog(default_catalog_path());
  return cat;
}

void same_optional(const std::optional<double>& got, double expected) {
  if (std::isnan(expected)) {
    CHECK_FALSE(got.has_value());
  } else {
    REQUIRE(got.has_value());
    CHECK(*got == expected);
  }
}

double total_coefficient(const MultiLink& l, const std::string& bus) {
  double v = 0.0;
  for (const auto& p : l.outputs)
    if (p.bus == bus) v += p.efficiency.at(0);
  return v;
}

ScenarioConfig reference_config() {
  ScenarioConfig c;
  c.horizon.hours = 48;
  return c;
}

Hub build(const ScenarioConfig& c, std::size_t hours = 48) {
  return build_hub(c, catalog(), toys::daily_market(hours));
}

}  // namespace

TEST_CASE("annuity") {
  CHECK(annuity(1040, 30, 0.07, 1.22) == doctest::Approx(96.50).epsilon(5e-5));
  CHECK(annuity(100, 10, 0.0, 0.0) == 10.0);
  CHECK(annuity(575, 25, 0.07, 4.0) == doctest::Approx(72.34).epsilon(5e-5));
  CHECK_THROWS_AS(annuity(100, 0, 0.07, 0), InputError);
  CHECK_THROWS_AS(annuity(100, -3, 0.07, 0), InputError);
}

TEST_CASE("cost table rows are shipped verbatim") {
  const auto& cat = catalog();
  CHECK(cat.discount_rate == 0.07);
  for (const Row& row : kCostTable) {
    INFO(row.key);
    const auto& r = cat.at(row.key);
    CHECK(r.investment_cost == row.investment);
    same_optional(r.fixed_om_pct, row.fixed_om);
    same_optional(r.variable_om, row.variable_om);
    same_optional(r.lifetime, row.lifetime);
  }
  CHECK(cat.at("transformers").investment_unit == "MEUR");
  CHECK(cat.at("onshore_wind").investment_unit == "kEUR");
}

TEST_CASE("annualized costs match an independent annuity for every cost row") {
  for (const Row& row : kCostTable) {
    INFO(row.key);
    const auto& r = catalog().at(row.key);
    const double scale = r.investment_unit == "MEUR" ? 1e6 : 1e3;
    const int life = static_cast<int>(std::isnan(row.lifetime) ? r.lifetime_years() : row.lifetime);
    const double om = std::isnan(row.fixed_om) ? 0.0 : row.fixed_om;
    const double expected = oracle_annuity(row.investment * scale, life, 0.07, om);
    CHECK(std::abs(annualized_cost(r, 0.07) - expected) <= 1e-9 * expected);
  }
  CHECK(annualized_cost(catalog().at("co2_evaporator"), 0.07) == 3.76e3);
}

TEST_CASE("conversion coefficients are shipped verbatim") {
  const auto& cat = catalog();
  const auto& bio = cat.at("biomethane_plant");
  CHECK(bio.coefficient("mt_heat") == -0.103);
  CHECK(bio.coefficient("electricity") == -0.04);
  CHECK(bio.coefficient("co2") == 0.0982);
  CHECK(bio.coefficient("pellets") == 0.09);
  const auto& sky = cat.at("skyclean");
  CHECK(sky.coefficient("electricity") == -0.067);
  CHECK(sky.coefficient("co2_emissions") == -0.164);
  CHECK(sky.coefficient("mt_heat") == 0.36);
  CHECK(cat.at("electrolysis_100mw").coefficient("h2") == 0.622);
  CHECK(cat.at("electrolysis_100mw").coefficient("lt_heat") == 0.223);
  CHECK(cat.at("electrolysis_100mw").min_load == 0.15);
  const auto& syn = cat.at("methanol_synthesis");
  CHECK(syn.coefficient("mt_heat") == -0.105);
  CHECK(syn.coefficient("electricity") == -0.018);
  CHECK(syn.coefficient("h2") == -1.155);
  CHECK(syn.coefficient("co2") == -0.253);
  CHECK(syn.coefficient("dh_heat") == 0.256);
  CHECK(syn.min_load == 0.2);
  CHECK(syn.ramp_hours == 48.0);
  CHECK(cat.at("co2_compressor").coefficient("electricity") == -0.096);
  CHECK(cat.at("h2_compressor").coefficient("electricity") == -0.010);
  CHECK(cat.at("heat_pump").coefficient("lt_heat") == -1.7);
  CHECK(cat.at("heat_pump").coefficient("dh_heat") == 2.7);
  CHECK(cat.at("co2_liquefaction").coefficient("electricity") == -0.077);
  CHECK(cat.at("co2_liquefaction").min_rate == 1.0);
  CHECK(cat.at("co2_liquefaction").max_rate == 15.0);
  CHECK(cat.constant("biochar_yield_alternative") == 0.173);
}

TEST_CASE("instantiate_technology reproduces the record") {
  Network net = toys::empty_network(2);
  net.carriers.push_back({"CO2", FlowUnit::TonnesPerHour});
  net.buses = {{"el", "electricity"}, {"h2", "H2"}, {"lt", "heat"}, {"dh", "heat"}, {"mt", "heat"},
               {"co2", "CO2"}, {"co2hp", "CO2"}, {"meoh", "H2"}};
  const auto ely = instantiate_technology(catalog().at("electrolysis_100mw"),
                                          {"el", {{"h2", {"h2"}}, {"lt_heat", {"lt"}}}}, "ely", 1.0, net);
  CHECK(ely.bus0 == "el");
  CHECK(ely.reference_sign == -1.0);
  CHECK(total_coefficient(ely, "h2") == 0.622);
  CHECK(total_coefficient(ely, "lt") == 0.223);
  CHECK(ely.min_load == 0.15);
  CHECK_FALSE(ely.ramp_up.has_value());

  const auto syn = instantiate_technology(
      catalog().at("methanol_synthesis"),
      {"meoh", {{"mt_heat", {"mt"}}, {"electricity", {"el"}}, {"h2", {"h2"}}, {"co2", {"co2hp"}}, {"dh_heat", {"dh"}}}},
      "syn", 1.0, net);
  CHECK(syn.reference_sign == 1.0);
  CHECK(total_coefficient(syn, "h2") == -1.155);
  CHECK(total_coefficient(syn, "co2hp") == -0.253);
  CHECK(total_coefficient(syn, "mt") == -0.105);
  CHECK(total_coefficient(syn, "dh") == 0.256);
  REQUIRE(syn.ramp_up.has_value());
  CHECK(*syn.ramp_up == doctest::Approx(1.0 / 48.0));

  const auto comp =
      instantiate_technology(catalog().at("co2_compressor"), {"co2", {{"electricity", {"el"}}}}, "comp", 1.0, net);
  CHECK(total_coefficient(comp, "el") == -0.096);

  const auto hp = instantiate_technology(catalog().at("heat_pump"), {"el", {{"lt_heat", {"lt"}}, {"dh_heat", {"dh"}}}},
                                         "hp", 1.0, net);
  CHECK(hp.reference_sign == -1.0);
  CHECK(total_coefficient(hp, "lt") == -1.7);
  CHECK(total_coefficient(hp, "dh") == 2.7);

  CHECK_THROWS_AS(instantiate_technology(catalog().at("heat_pump"), {"el", {{"lt_heat", {"lt"}}}}, "hp", 1.0, net),
                  InputError);
  CHECK_THROWS_AS(instantiate_technology(catalog().at("heat_pump"),
                                         {"el", {{"lt_heat", {"lt"}}, {"dh_heat", {"nowhere"}}}}, "hp", 1.0, net),
                  InputError);
  CHECK_THROWS_AS(instantiate_technology(catalog().at("onshore_wind"), {"el", {}}, "w", 1.0, net), InputError);
}

TEST_CASE("CO2 budget and methanol demand") {
  CHECK(co2_budget(190, catalog()) == doctest::Approx(190e3 * 0.0982));
  CHECK(std::round(co2_budget(190, catalog())) == 18658.0);
  CHECK(co2_budget(0, catalog()) == 0.0);
  CHECK(std::round(co2_budget(240, catalog())) == 23568.0);
  CHECK(meoh_demand(190, 0.9, catalog()) == doctest::Approx(190e3 * 0.0982 * 0.9 / 0.253).epsilon(1e-12));
  // The commonly quoted 66 371 MWh truncates 66 372.3.
  CHECK(std::abs(meoh_demand(190, 0.9, catalog()) - 66371.0) < 1.5);
}

TEST_CASE("conversion ratios") {
  CHECK(alpha_h2(catalog()) == 0.622);
  const double el = 1.155 / 0.622 + 0.018 + 1.155 * 0.010 + 0.253 * 0.096;
  CHECK(alpha_meoh(catalog()) == doctest::Approx(1.0 / el).epsilon(1e-12));
  CHECK(alpha_meoh_derivation(catalog()).find("alpha_MeOH") != std::string::npos);
}

TEST_CASE("hydrogen-to-grid hub topology") {
  const Hub hub = build(reference_config());
  const Network& n = hub.network;
  CHECK(validate_network(n).empty());
  const Load* h2 = n.find_load(hub::h2_load);
  REQUIRE(h2 != nullptr);
  CHECK(std::get<AnnualTotal>(h2->kind).total == 272e3);
  const Load* meoh = n.find_load(hub::meoh_load);
  REQUIRE(meoh != nullptr);
  CHECK(std::get<AnnualTotal>(meoh->kind).total == doctest::Approx(meoh_demand(190, 0.9, catalog())));
  for (const char* bus : {hub::dk1, hub::ng, hub::el2, hub::el3, hub::h2, hub::co2_lp, hub::co2_hp, hub::biomethane,
                          hub::pellets, hub::mt_heat, hub::dh_heat, hub::lt_heat, hub::meoh})
    CHECK_MESSAGE(n.find_bus(bus) != nullptr, bus);
  CHECK(n.find_bus(hub::dh_grid) == nullptr);
  CHECK(n.find_link(hub::heat_pump) == nullptr);
  CHECK(n.find_link(hub::skyclean) == nullptr);
  CHECK(n.find_bus(hub::biochar) == nullptr);
  const auto& ely = catalog().at("electrolysis_100mw");
  const double water = annualized_cost(catalog().at("water_purification"), 0.07) * 9.0 * 0.622 / 33.33;
  CHECK(n.find_link(hub::electrolysis)->capital_cost == doctest::Approx(annualized_cost(ely, 0.07) + water));
  CHECK(n.find_link(hub::grid_to_el3)->external_trade);
  CHECK(n.find_link(hub::re_to_hub)->bus0 == hub::el3);
}

TEST_CASE("standalone methanol hub") {
  ScenarioConfig c = reference_config();
  c.scenario = ScenarioKind::MeOHStandalone;
  const Hub hub = build(c);
  CHECK(hub.network.find_load(hub::h2_load) == nullptr);
  CHECK(hub.h2_demand == 0.0);
  const double water = annualized_cost(catalog().at("water_purification"), 0.07) * 9.0 * 0.622 / 33.33;
  CHECK(hub.network.find_link(hub::electrolysis)->capital_cost ==
        doctest::Approx(oracle_annuity(900e3, 25, 0.07, 4.0) + water));
}

TEST_CASE("district heating and biochar add-ons") {
  ScenarioConfig c = reference_config();
  c.dh_enabled = true;
  c.biochar_enabled = true;
  const Hub hub = build(c);
  const Network& n = hub.network;
  CHECK(n.find_bus(hub::dh_grid) != nullptr);
  REQUIRE(n.find_link(hub::heat_pump) != nullptr);
  CHECK(total_coefficient(*n.find_link(hub::heat_pump), hub::dh_heat) == 2.7);
  CHECK(n.find_link("DH_sale")->marginal_cost.at(0) == -54.0);
  const MultiLink* sky = n.find_link(hub::skyclean);
  REQUIRE(sky != nullptr);
  CHECK(sky->potential == 40.0);
  CHECK(total_coefficient(*sky, hub::biochar) == doctest::Approx(0.164));
  CHECK(n.find_link("biochar_credits")->marginal_cost.at(0) == -150.0);
  CHECK(n.find_load("DH_demand") != nullptr);

  c.co2_tax = 0.0;
  const auto warn = config_warnings(c);
  CHECK(std::any_of(warn.begin(), warn.end(), [](const auto& w) { return w.find("biochar") != std::string::npos; }));
}

TEST_CASE("doubling the biomethane output doubles its fixed flows") {
  ScenarioConfig a = reference_config();
  ScenarioConfig b = a;
  b.biomethane_output = 2.0 * a.biomethane_output;
  b.allow_off_grid = true;
  const Hub ha = build(a);
  const Hub hb = build(b);
  CHECK(co2_budget(b.biomethane_output, catalog()) == 2.0 * co2_budget(a.biomethane_output, catalog()));
  const MultiLink* pa = ha.network.find_link(hub::biomethane_plant);
  const MultiLink* pb = hb.network.find_link(hub::biomethane_plant);
  CHECK(pb->fixed_capacity == doctest::Approx(2.0 * pa->fixed_capacity));
  for (const char* bus : {hub::co2_lp, hub::pellets, hub::mt_heat, hub::el2})
    CHECK(pb->fixed_capacity * total_coefficient(*pb, bus) ==
          doctest::Approx(2.0 * pa->fixed_capacity * total_coefficient(*pa, bus)));
  CHECK(hb.network.find_link("NG_boiler_existing")->fixed_capacity ==
        doctest::Approx(2.0 * ha.network.find_link("NG_boiler_existing")->fixed_capacity));
  CHECK(fixed_demand(hb.network, hub::biomethane, 3) == doctest::Approx(2.0 * fixed_demand(ha.network, hub::biomethane, 3)));
  CHECK(hb.meoh_demand == doctest::Approx(2.0 * ha.meoh_demand));
}

TEST_CASE("storage extras on the built hub") {
  const Network n = build(reference_config()).network;
  CHECK(total_coefficient(*n.find_link("H2_store_charge"), hub::el2) * 33.33 == doctest::Approx(-0.068));
  CHECK(total_coefficient(*n.find_link("CO2_cyl_charge"), hub::el2) == doctest::Approx(-0.010));
  const MultiLink* liq = n.find_link(hub::co2_liquefaction);
  CHECK(total_coefficient(*liq, hub::el2) == doctest::Approx(-0.077));
  CHECK(liq->potential == 15.0);
  CHECK(liq->min_build == 1.0);
  const MultiLink* evap = n.find_link(hub::co2_evaporator);
  CHECK(evap->potential == 15.0);
  CHECK(evap->min_build == 1.0);
  for (const char* l : {hub::battery_charger, hub::battery_discharger}) {
    REQUIRE(n.find_link(l)->rate_limit.has_value());
    CHECK(n.find_link(l)->rate_limit->ratio == 1.0);
  }
  for (const char* l : {"hot_water_tank_charge", "hot_water_tank_discharge", "thermal_battery_charge",
                        "thermal_battery_discharge"}) {
    REQUIRE(n.find_link(l)->rate_limit.has_value());
    CHECK(n.find_link(l)->rate_limit->ratio == doctest::Approx(1.0 / 6.0));
  }
  CHECK(total_coefficient(*n.find_link("thermal_battery_charge"), "ThermalBattery") *
            total_coefficient(*n.find_link("thermal_battery_discharge"), hub::mt_heat) ==
        doctest::Approx(0.95));
}

TEST_CASE("external demand matches the sellable volume for every maxRE") {
  for (double re : {0.1, 0.5, 1.0}) {
    ScenarioConfig c = reference_config();
    c.max_re = re;
    const Hub hub = build(c, 72);
    const auto& d = std::get<FixedSeries>(hub.network.find_load(hub::dk1_load)->kind).demand.values();
    const double annual = std::accumulate(d.begin(), d.end(), 0.0) * kHoursPerYear / 72.0;
    const double expected = (272e3 / 0.622 + hub.meoh_demand / hub.alpha_meoh) * re;
    CHECK(std::abs(annual - expected) <= 1e-9 * expected);
  }
}

TEST_CASE("scenario configuration") {
  ScenarioConfig c = reference_config();
  CHECK(validate_config(c).empty());
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_hash(c) == config_hash(config_from_json(to_json(c))));
  ScenarioConfig d = c;
  d.co2_tax = 250;
  CHECK(config_hash(c) != config_hash(d));

  c.co2_recovery_ratio = 1.2;
  REQUIRE(validate_config(c).size() == 1);
  CHECK(validate_config(c)[0].find("out of range") != std::string::npos);
  c.co2_recovery_ratio = 0.87;
  CHECK(validate_config(c)[0].find("sensitivity range") != std::string::npos);
  c.allow_off_grid = true;
  CHECK(validate_config(c).empty());
  CHECK_THROWS_AS(build_hub(ScenarioConfig{.biomethane_output = -1.0}, catalog(), toys::daily_market(24)),
                  InputError);

  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json{{"co2_tx", 150}}), doctest::Contains("co2_tx"), InputError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"scenario", "H2"}}), InputError);
  const auto parsed = config_from_json(nlohmann::json{{"scenario", "MeOH_standalone"}, {"max_re", 1.0}});
  CHECK(parsed.scenario == ScenarioKind::MeOHStandalone);
  CHECK(parsed.max_re == 1.0);
  CHECK(parsed.tariffs.placeholder);
}
