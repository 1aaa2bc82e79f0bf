#include "hubopt/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#ifndef HUBOPT_DATA_DIR
#define HUBOPT_DATA_DIR "data"
#endif

namespace hubopt {

namespace {

using nlohmann::json;

std::optional<double> opt_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw InputError(fmt::format("catalog: '{}' must be a number", key));
  return it->get<double>();
}

std::string opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  return (it == j.end() || it->is_null()) ? std::string() : it->get<std::string>();
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// records

double TechnologyRecord::investment_eur() const {
  if (investment_unit == "kEUR" || investment_unit == "kEUR_per_year") return investment_cost * 1e3;
  if (investment_unit == "MEUR") return investment_cost * 1e6;
  throw InputError(fmt::format("{}: unknown investment unit '{}'", key, investment_unit));
}

double TechnologyRecord::lifetime_years() const {
  if (lifetime) return *lifetime;
  if (default_lifetime) return *default_lifetime;
  throw InputError(key + ": no lifetime");
}

bool TechnologyRecord::has_port(const std::string& port) const {
  return std::any_of(coefficients.begin(), coefficients.end(), [&](const Coefficient& c) { return c.port == port; });
}

double TechnologyRecord::coefficient(const std::string& port) const {
  for (const auto& c : coefficients)
    if (c.port == port) return c.output ? c.value : -c.value;
  throw InputError(fmt::format("{}: no coefficient for '{}'", key, port));
}

const TechnologyRecord& Catalog::at(const std::string& key) const {
  for (const auto& r : records)
    if (r.key == key) return r;
  throw InputError("catalog has no technology '" + key + "'");
}

double Catalog::constant(const std::string& name) const {
  auto it = constants.find(name);
  if (it == constants.end()) throw InputError("catalog has no constant '" + name + "'");
  return it->second;
}

Catalog parse_catalog(const json& doc) {
  Catalog cat;
  cat.schema = doc.value("schema", "");
  if (cat.schema != "hubopt-catalog/1") throw InputError("catalog: unsupported schema '" + cat.schema + "'");
  cat.version = doc.value("version", "");
  cat.discount_rate = doc.value("discount_rate", 0.07);
  if (doc.contains("defaults")) cat.default_lifetime = doc["defaults"].value("lifetime_years", 25.0);
  const json constants = doc.value("constants", json::object());
  for (auto it = constants.begin(); it != constants.end(); ++it) {
    if (!it->is_number()) throw InputError("catalog: constant '" + it.key() + "' must be a number");
    cat.constants[it.key()] = it->get<double>();
  }
  for (const auto& j : doc.at("technologies")) {
    TechnologyRecord r;
    r.key = j.at("key").get<std::string>();
    r.name = opt_string(j, "name");
    r.section = opt_string(j, "section");
    r.reference_flow = opt_string(j, "reference_flow");
    r.investment_cost = j.at("investment_cost").get<double>();
    r.investment_unit = j.value("investment_unit", "kEUR");
    r.fixed_om_pct = opt_number(j, "fixed_om_pct");
    r.variable_om = opt_number(j, "variable_om");
    r.lifetime = opt_number(j, "lifetime");
    r.default_lifetime = opt_number(j, "default_lifetime");
    if (!r.lifetime && !r.default_lifetime) r.default_lifetime = cat.default_lifetime;
    r.source = opt_string(j, "source");
    r.applied = j.value("applied", true);
    r.reference_role = opt_string(j, "reference_role");
    for (const auto& c : j.value("coefficients", json::array())) {
      const std::string dir = c.at("direction").get<std::string>();
      if (dir != "input" && dir != "output") throw InputError(r.key + ": direction must be input or output");
      r.coefficients.push_back({c.at("port").get<std::string>(), dir == "output", c.at("value").get<double>(),
                                c.value("unit", "")});
    }
    r.min_load = opt_number(j, "min_load");
    r.ramp_hours = opt_number(j, "ramp_hours");
    r.max_capacity = opt_number(j, "max_capacity");
    r.rate_limit = opt_number(j, "rate_limit");
    r.min_rate = opt_number(j, "min_rate");
    r.max_rate = opt_number(j, "max_rate");

    if (r.lifetime_years() <= 0.0) throw InputError(r.key + ": lifetime must be positive");
    if (r.fixed_om_pct && *r.fixed_om_pct < 0.0) throw InputError(r.key + ": fixed O&M must be >= 0");
    if (r.investment_cost < 0.0) throw InputError(r.key + ": investment must be >= 0");
    r.investment_eur();
    if (std::any_of(cat.records.begin(), cat.records.end(), [&](const auto& o) { return o.key == r.key; }))
      throw InputError("catalog: duplicate technology '" + r.key + "'");
    cat.records.push_back(std::move(r));
  }
  return cat;
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open catalog " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  try {
    return parse_catalog(doc);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string default_data_dir() { return HUBOPT_DATA_DIR; }

std::string default_catalog_path() { return (std::filesystem::path(default_data_dir()) / "catalog.json").string(); }

double annuity(double investment, double lifetime, double rate, double fixed_om_pct) {
  if (!(lifetime > 0.0)) throw InputError(fmt::format("annuity: lifetime {} must be positive", lifetime));
  if (rate < 0.0) throw InputError("annuity: negative discount rate");
  const double capital =
      rate == 0.0 ? investment / lifetime : investment * rate / (1.0 - std::pow(1.0 + rate, -lifetime));
  return capital + investment * fixed_om_pct / 100.0;
}

double annualized_cost(const TechnologyRecord& record, double rate) {
  if (record.annualized_input()) return record.investment_eur();
  return annuity(record.investment_eur(), record.lifetime_years(), rate, record.fixed_om_pct.value_or(0.0));
}

MultiLink instantiate_technology(const TechnologyRecord& record, const PortMap& ports, const std::string& name,
                                 double capital_cost, const Network& network) {
  if (record.reference_role != "input" && record.reference_role != "output")
    throw InputError(record.key + ": record carries no conversion data");
  if (network.find_bus(ports.reference_bus) == nullptr)
    throw InputError(fmt::format("{}: unknown bus '{}'", name, ports.reference_bus));
  MultiLink l;
  l.name = name;
  l.bus0 = ports.reference_bus;
  l.reference_sign = record.reference_role == "output" ? 1.0 : -1.0;
  for (const auto& c : record.coefficients) {
    auto it = ports.ports.find(c.port);
    if (it == ports.ports.end()) throw InputError(fmt::format("{}: unknown carrier port '{}'", name, c.port));
    if (network.find_bus(it->second.bus) == nullptr)
      throw InputError(fmt::format("{}: unknown bus '{}' for port '{}'", name, it->second.bus, c.port));
    l.outputs.push_back({it->second.bus, (c.output ? c.value : -c.value) * it->second.scale});
  }
  l.extendable = true;
  l.capital_cost = capital_cost;
  l.marginal_cost = record.variable_om.value_or(0.0);
  l.min_load = record.min_load.value_or(0.0);
  if (record.ramp_hours && *record.ramp_hours > 1.0) {
    l.ramp_up = 1.0 / *record.ramp_hours;
    l.ramp_down = l.ramp_up;
  }
  if (record.max_capacity) l.potential = record.max_capacity;
  if (record.max_rate) l.potential = record.max_rate;
  if (record.min_rate) l.min_build = record.min_rate;
  return l;
}

// ---------------------------------------------------------------------------
// scenario configuration

std::string to_string(ScenarioKind kind) { return kind == ScenarioKind::H2ToGrid ? "H2_to_grid" : "MeOH_standalone"; }

ScenarioKind scenario_from_string(const std::string& text) {
  if (text == "H2_to_grid") return ScenarioKind::H2ToGrid;
  if (text == "MeOH_standalone") return ScenarioKind::MeOHStandalone;
  throw InputError("unknown scenario '" + text + "' (expected H2_to_grid or MeOH_standalone)");
}

namespace {

const std::vector<double> kRecoveryGrid{0.80, 0.85, 0.90, 0.95, 0.99};
const std::vector<double> kTaxGrid{0.0, 150.0, 250.0};
const std::vector<double> kMaxReGrid{0.1, 0.5, 1.0};
const std::vector<int> kYearGrid{2019, 2022};

bool on_grid(double v, const std::vector<double>& grid) {
  return std::any_of(grid.begin(), grid.end(), [&](double g) { return near(v, g); });
}

std::string list(const std::vector<double>& grid) {
  std::vector<std::string> parts;
  for (double g : grid) parts.push_back(fmt::format("{}", g));
  return "{" + fmt::format("{}", fmt::join(parts, ", ")) + "}";
}

}  // namespace

std::vector<std::string> validate_config(const ScenarioConfig& c) {
  std::vector<std::string> out;
  auto grid = [&](const char* field, double v, const std::vector<double>& values) {
    if (!c.allow_off_grid && !on_grid(v, values))
      out.push_back(fmt::format("{} {} out of the sensitivity range {}", field, v, list(values)));
  };
  if (!(c.co2_recovery_ratio > 0.0 && c.co2_recovery_ratio <= 1.0))
    out.push_back(fmt::format("co2_recovery_ratio {} out of range (0, 1]", c.co2_recovery_ratio));
  else
    grid("co2_recovery_ratio", c.co2_recovery_ratio, kRecoveryGrid);
  if (c.co2_tax < 0.0) out.push_back(fmt::format("co2_tax {} must be >= 0", c.co2_tax));
  else grid("co2_tax", c.co2_tax, kTaxGrid);
  if (c.max_re < 0.0) out.push_back(fmt::format("max_re {} must be >= 0", c.max_re));
  else grid("max_re", c.max_re, kMaxReGrid);
  if (!c.allow_off_grid && std::find(kYearGrid.begin(), kYearGrid.end(), c.price_year) == kYearGrid.end())
    out.push_back(fmt::format("price_year {} out of the sensitivity range {{2019, 2022}}", c.price_year));
  if (!(c.biomethane_output > 0.0)) out.push_back("biomethane_output must be > 0");
  if (c.h2_grid_demand < 0.0) out.push_back("h2_grid_demand must be >= 0");
  if (c.discount_rate < 0.0) out.push_back("discount_rate must be >= 0");
  if (c.pellet_price < 0.0) out.push_back("pellet_price must be >= 0");
  if (c.solver != "external" && c.solver != "reference")
    out.push_back("solver must be 'external' or 'reference', got '" + c.solver + "'");
  for (int w : c.horizon.weeks)
    if (w < 0 || w > 51) out.push_back(fmt::format("horizon week {} out of range [0, 51]", w));
  if (!c.horizon.weeks.empty() && (c.horizon.hours != 0 || c.horizon.offset != 0))
    out.push_back("horizon: give either weeks or hours/offset, not both");
  return out;
}

std::vector<std::string> config_warnings(const ScenarioConfig& c) {
  std::vector<std::string> out;
  if (c.biochar_enabled && c.co2_tax == 0.0) out.push_back("biochar credits enabled at co2_tax 0: the credit is zero");
  if (c.tariffs.placeholder)
    out.push_back(fmt::format("tariffs TF_p={} TF_sl={} and em_NG={} are placeholder defaults", c.tariffs.purchase,
                              c.tariffs.sale, c.tariffs.ng_emission));
  if (c.allow_off_grid) out.push_back("off-grid parameter values allowed");
  return out;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["scenario"] = to_string(c.scenario);
  j["h2_grid_demand_gwh"] = c.h2_grid_demand;
  j["co2_recovery_ratio"] = c.co2_recovery_ratio;
  j["co2_tax"] = c.co2_tax;
  j["max_re"] = c.max_re;
  j["price_year"] = c.price_year;
  j["dh_enabled"] = c.dh_enabled;
  j["biochar_enabled"] = c.biochar_enabled;
  j["biomethane_output_gwh"] = c.biomethane_output;
  j["discount_rate"] = c.discount_rate;
  j["data_dir"] = c.data_dir;
  j["horizon"] = {{"weeks", c.horizon.weeks}, {"hours", c.horizon.hours}, {"offset", c.horizon.offset}};
  j["tariffs"] = {{"purchase", c.tariffs.purchase},
                  {"sale", c.tariffs.sale},
                  {"ng_emission", c.tariffs.ng_emission},
                  {"placeholder", c.tariffs.placeholder}};
  j["pellet_price"] = c.pellet_price;
  j["solver"] = c.solver;
  j["allow_off_grid"] = c.allow_off_grid;
  return j;
}

ScenarioConfig config_from_json(const json& doc) {
  static const std::vector<std::string> known{
      "name",    "scenario",       "h2_grid_demand_gwh",    "co2_recovery_ratio", "co2_tax",
      "max_re",  "price_year",     "dh_enabled",            "biochar_enabled",    "biomethane_output_gwh",
      "discount_rate", "data_dir", "horizon",               "tariffs",            "pellet_price",
      "solver",  "allow_off_grid"};
  if (!doc.is_object()) throw InputError("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw InputError("config: unknown key '" + it.key() + "'");
  ScenarioConfig c;
  try {
    c.name = doc.value("name", c.name);
    if (doc.contains("scenario")) c.scenario = scenario_from_string(doc["scenario"].get<std::string>());
    c.h2_grid_demand = doc.value("h2_grid_demand_gwh", c.h2_grid_demand);
    c.co2_recovery_ratio = doc.value("co2_recovery_ratio", c.co2_recovery_ratio);
    c.co2_tax = doc.value("co2_tax", c.co2_tax);
    c.max_re = doc.value("max_re", c.max_re);
    c.price_year = doc.value("price_year", c.price_year);
    c.dh_enabled = doc.value("dh_enabled", c.dh_enabled);
    c.biochar_enabled = doc.value("biochar_enabled", c.biochar_enabled);
    c.biomethane_output = doc.value("biomethane_output_gwh", c.biomethane_output);
    c.discount_rate = doc.value("discount_rate", c.discount_rate);
    c.data_dir = doc.value("data_dir", c.data_dir);
    if (doc.contains("horizon")) {
      const auto& h = doc["horizon"];
      c.horizon.weeks = h.value("weeks", std::vector<int>{});
      c.horizon.hours = h.value("hours", std::size_t{0});
      c.horizon.offset = h.value("offset", std::size_t{0});
    }
    if (doc.contains("tariffs")) {
      const auto& t = doc["tariffs"];
      c.tariffs.purchase = t.value("purchase", c.tariffs.purchase);
      c.tariffs.sale = t.value("sale", c.tariffs.sale);
      c.tariffs.ng_emission = t.value("ng_emission", c.tariffs.ng_emission);
      c.tariffs.placeholder = t.value("placeholder", false);
    }
    c.pellet_price = doc.value("pellet_price", c.pellet_price);
    c.solver = doc.value("solver", c.solver);
    c.allow_off_grid = doc.value("allow_off_grid", c.allow_off_grid);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  ScenarioConfig c = config_from_json(doc);
  if (!c.data_dir.empty() && std::filesystem::path(c.data_dir).is_relative())
    c.data_dir = (std::filesystem::path(path).parent_path() / c.data_dir).lexically_normal().string();
  return c;
}

std::uint64_t config_hash(const ScenarioConfig& config) { return fnv1a(to_json(config).dump()); }

std::string hash_hex(std::uint64_t hash) { return fmt::format("{:016x}", hash); }

std::string market_dir(const ScenarioConfig& config) {
  if (!config.data_dir.empty()) return config.data_dir;
  return (std::filesystem::path(default_data_dir()) / "synthetic" / std::to_string(config.price_year)).string();
}

MarketSeries load_case_market(const ScenarioConfig& config) {
  MarketSeries full = load_market(market_dir(config), config.tariffs);
  if (!config.horizon.weeks.empty()) return select_weeks(full, config.horizon.weeks);
  if (config.horizon.hours != 0) return select_hours(full, config.horizon.hours, config.horizon.offset);
  if (config.horizon.offset != 0)
    return select_hours(full, full.snapshots.size() - config.horizon.offset, config.horizon.offset);
  return full;
}

// ---------------------------------------------------------------------------
// derived quantities

double alpha_h2(const Catalog& catalog) { return catalog.at("electrolysis_100mw").coefficient("h2"); }

namespace {

struct MeohElectricity {
  double electrolysis, synthesis, h2_compression, co2_compression;
  double total() const { return electrolysis + synthesis + h2_compression + co2_compression; }
};

MeohElectricity meoh_electricity(const Catalog& catalog) {
  const auto& syn = catalog.at("methanol_synthesis");
  const double h2_in = -syn.coefficient("h2");
  const double co2_in = -syn.coefficient("co2");
  return {h2_in / alpha_h2(catalog), -syn.coefficient("electricity"),
          h2_in * -catalog.at("h2_compressor").coefficient("electricity"),
          co2_in * -catalog.at("co2_compressor").coefficient("electricity")};
}

}  // namespace

double alpha_meoh(const Catalog& catalog) { return 1.0 / meoh_electricity(catalog).total(); }

std::string alpha_meoh_derivation(const Catalog& catalog) {
  const auto e = meoh_electricity(catalog);
  return fmt::format(
      "alpha_MeOH = 1 / (electrolysis {:.6f} + synthesis {:.6f} + H2 compression {:.6f} + CO2 compression {:.6f}) "
      "= 1 / {:.6f} = {:.6f} MWh_MeOH/MWh_el",
      e.electrolysis, e.synthesis, e.h2_compression, e.co2_compression, e.total(), 1.0 / e.total());
}

double co2_budget(double biomethane_output_gwh, const Catalog& catalog) {
  return biomethane_output_gwh * 1e3 * catalog.at("biomethane_plant").coefficient("co2");
}

double meoh_demand(double biomethane_output_gwh, double recovery_ratio, const Catalog& catalog) {
  const double co2_per_mwh = -catalog.at("methanol_synthesis").coefficient("co2");
  return co2_budget(biomethane_output_gwh, catalog) * recovery_ratio / co2_per_mwh;
}

// ---------------------------------------------------------------------------
// hub builder

namespace {

constexpr double kUnlimited = 1e5;  // MW or t/h; far above any hub flow

class HubBuilder {
 public:
  HubBuilder(const ScenarioConfig& config, const Catalog& catalog, const MarketSeries& market)
      : cfg_(config), cat_(catalog), mkt_(market), rate_(config.discount_rate) {}

  Hub build();

 private:
  double capex(const std::string& key) const { return annualized_cost(cat_.at(key), rate_); }
  void bus(const std::string& name, const std::string& carrier) { net().buses.push_back({name, carrier}); }
  Network& net() { return hub_.network; }

  Generator& generator(const std::string& name, const std::string& bus, const std::string& group) {
    Generator g;
    g.name = name;
    g.bus = bus;
    g.group = group;
    net().generators.push_back(std::move(g));
    return net().generators.back();
  }

  MultiLink& link(const std::string& name, const std::string& from, std::vector<LinkPort> outputs,
                  const std::string& group) {
    MultiLink l;
    l.name = name;
    l.bus0 = from;
    l.outputs = std::move(outputs);
    l.group = group;
    l.fixed_capacity = kUnlimited;
    net().links.push_back(std::move(l));
    return net().links.back();
  }

  MultiLink& add(MultiLink l, const std::string& group) {
    l.group = group;
    net().links.push_back(std::move(l));
    return net().links.back();
  }

  static void extendable(MultiLink& l, double capital) {
    l.extendable = true;
    l.fixed_capacity = 0.0;
    l.capital_cost = capital;
  }

  void store(const std::string& name, const std::string& bus, double capital, const std::string& group) {
    Store s;
    s.name = name;
    s.bus = bus;
    s.group = group;
    s.extendable = true;
    s.capital_cost = capital;
    net().stores.push_back(std::move(s));
  }

  void sink(const std::string& name, const std::string& bus) { link(name, bus, {}, groups::sink); }

  void carriers();
  void buses();
  void grid_interface();
  void reference_plant();
  void hydrogen_and_methanol();
  void heat();
  void storage();
  void loads();

  const ScenarioConfig& cfg_;
  const Catalog& cat_;
  const MarketSeries& mkt_;
  const double rate_;
  Hub hub_;
  std::vector<double> purchase_, sale_, ng_;
  double biomethane_mw_ = 0.0;
  double intercooling_ = 0.0;
};

Hub HubBuilder::build() {
  Network& n = net();
  n.name = fmt::format("{}_{}", to_string(cfg_.scenario), cfg_.price_year);
  n.snapshots = mkt_.snapshots;
  const auto problems = mkt_.check();
  if (!problems.empty()) throw InputError("market series: " + problems.front());
  purchase_ = purchase_price(mkt_, cfg_.co2_tax);
  sale_ = sale_price(mkt_);
  ng_ = ng_price(mkt_, cfg_.co2_tax);
  biomethane_mw_ = cfg_.biomethane_output * 1e3 / kHoursPerYear;
  const double hot = cat_.constant("compressor_outlet_c");
  intercooling_ = (hot - cat_.constant("dh_supply_c")) / (hot - cat_.constant("ambient_c"));

  hub_.alpha_h2 = alpha_h2(cat_);
  hub_.alpha_meoh = alpha_meoh(cat_);
  hub_.h2_demand = cfg_.scenario == ScenarioKind::H2ToGrid ? cfg_.h2_grid_demand * 1e3 : 0.0;
  hub_.meoh_demand = meoh_demand(cfg_.biomethane_output, cfg_.co2_recovery_ratio, cat_);
  hub_.external_demand_total =
      max_re_sales(hub_.h2_demand, hub_.alpha_h2, hub_.meoh_demand, hub_.alpha_meoh, cfg_.max_re);
  hub_.log.push_back(alpha_meoh_derivation(cat_));
  hub_.log.push_back(fmt::format("external demand = ({:.1f}/{:.4f} + {:.1f}/{:.6f}) * {} = {:.1f} MWh/y",
                                 hub_.h2_demand, hub_.alpha_h2, hub_.meoh_demand, hub_.alpha_meoh, cfg_.max_re,
                                 hub_.external_demand_total));
  hub_.warnings = config_warnings(cfg_);
  for (const auto& r : cat_.records)
    if (r.applied && r.lifetime_defaulted() && !r.annualized_input())
      hub_.warnings.push_back(fmt::format("{}: no printed lifetime, {} y applied", r.key, r.lifetime_years()));

  carriers();
  buses();
  grid_interface();
  reference_plant();
  hydrogen_and_methanol();
  heat();
  storage();
  loads();

  const auto violations = validate_network(n);
  if (!violations.empty())
    throw InputError(fmt::format("built hub is invalid: {}: {}", violations.front().component,
                                 violations.front().message));
  return std::move(hub_);
}

void HubBuilder::carriers() {
  net().carriers = {{"electricity", FlowUnit::MW}, {"NG", FlowUnit::MW},          {"H2", FlowUnit::MW},
                    {"CO2", FlowUnit::TonnesPerHour}, {"bioCH4", FlowUnit::MW},     {"pellets", FlowUnit::MW},
                    {"MT_heat", FlowUnit::MW},    {"DH_heat", FlowUnit::MW},     {"LT_heat", FlowUnit::MW},
                    {"MeOH", FlowUnit::MW},       {"biochar", FlowUnit::TonnesPerHour}};
}

void HubBuilder::buses() {
  bus(hub::dk1, "electricity");
  bus(hub::ng, "NG");
  bus(hub::el3, "electricity");
  bus(hub::el2, "electricity");
  bus(hub::h2, "H2");
  bus(hub::h2_hp, "H2");
  bus(hub::co2_lp, "CO2");
  bus(hub::co2_hp, "CO2");
  bus(hub::biomethane, "bioCH4");
  bus(hub::pellets, "pellets");
  bus(hub::mt_heat, "MT_heat");
  bus(hub::dh_heat, "DH_heat");
  bus(hub::lt_heat, "LT_heat");
  bus(hub::meoh, "MeOH");
  bus("H2_store", "H2");
  bus("CO2_cyl", "CO2");
  bus("CO2_liq", "CO2");
  bus("Battery", "electricity");
  bus("TES", "DH_heat");
  bus("ThermalBattery", "MT_heat");
  if (cfg_.dh_enabled) bus(hub::dh_grid, "DH_heat");
  if (cfg_.biochar_enabled) bus(hub::biochar, "biochar");
}

void HubBuilder::grid_interface() {
  const double grid = capex("grid_connection");

  auto& wind = generator("wind", hub::el3, groups::renewables);
  const auto& wrec = cat_.at("onshore_wind");
  wind.extendable = true;
  wind.capital_cost = annualized_cost(wrec, rate_);
  wind.marginal_cost = wrec.variable_om.value_or(0.0);
  wind.availability_max = Profile(mkt_.wind_cf);

  auto& solar = generator("solar", hub::el3, groups::renewables);
  const auto& srec = cat_.at("solar_pv");
  solar.extendable = true;
  solar.capital_cost = annualized_cost(srec, rate_);
  solar.marginal_cost = srec.variable_om.value_or(0.0);
  solar.availability_max = Profile(mkt_.solar_cf);

  // Serves whatever part of the external demand the hub does not sell.
  auto& slack = generator("DK1_slack", hub::dk1, groups::external);
  slack.fixed_capacity = kUnlimited;

  auto& gas = generator("NG_supply", hub::ng, groups::external);
  gas.fixed_capacity = kUnlimited;
  gas.marginal_cost = Profile(ng_);

  auto& pellets = generator("pellet_market", hub::pellets, groups::external);
  pellets.fixed_capacity = kUnlimited;
  pellets.marginal_cost = cfg_.pellet_price / cat_.constant("pellet_lhv_mwh_per_t");

  auto& buy_re = link(hub::grid_to_el3, hub::dk1, {{hub::el3, 1.0}}, groups::renewables);
  extendable(buy_re, grid);
  buy_re.marginal_cost = Profile(purchase_);
  buy_re.availability_max = Profile(rfnbo_mask(mkt_.spot, cat_.constant("rfnbo_spot_threshold")));
  buy_re.external_trade = true;

  auto& buy = link(hub::grid_to_el2, hub::dk1, {{hub::el2, 1.0}}, groups::renewables);
  extendable(buy, grid);
  buy.marginal_cost = Profile(purchase_);
  buy.external_trade = true;

  std::vector<double> revenue(sale_.size());
  std::transform(sale_.begin(), sale_.end(), revenue.begin(), [](double p) { return -p; });
  auto& sell = link(hub::el3_to_grid, hub::el3, {{hub::dk1, 1.0}}, groups::renewables);
  extendable(sell, grid);
  sell.marginal_cost = Profile(revenue);
  sell.external_trade = true;

  auto& re = link(hub::re_to_hub, hub::el3, {{hub::el2, 1.0}}, groups::symbiosis);
  extendable(re, capex("transformers"));
}

void HubBuilder::reference_plant() {
  const auto& rec = cat_.at("biomethane_plant");
  PortMap ports{hub::biomethane,
                {{"mt_heat", {hub::mt_heat}},
                 {"electricity", {hub::el2}},
                 {"co2", {hub::co2_lp}},
                 {"pellets", {hub::pellets}}}};
  MultiLink plant = instantiate_technology(rec, ports, hub::biomethane_plant, 0.0, net());
  plant.extendable = false;
  plant.fixed_capacity = biomethane_mw_;

  // Reference operation is free: credit its grid electricity and boiler heat.
  const double el = -rec.coefficient("electricity");
  const double mt = -rec.coefficient("mt_heat");
  const double eta = cat_.constant("ng_boiler_efficiency");
  const double boiler_vom = cat_.at("ng_boiler").variable_om.value_or(0.0);
  std::vector<double> credit(purchase_.size());
  for (std::size_t t = 0; t < credit.size(); ++t) credit[t] = -(el * purchase_[t] + mt * (ng_[t] / eta + boiler_vom));
  plant.marginal_cost = Profile(credit);
  add(std::move(plant), groups::reference);

  auto& boiler = link("NG_boiler_existing", hub::ng, {{hub::mt_heat, eta}}, groups::reference);
  boiler.fixed_capacity = mt * biomethane_mw_ / eta;
  boiler.marginal_cost = boiler_vom * eta;
}

void HubBuilder::hydrogen_and_methanol() {
  const bool standalone = cfg_.scenario == ScenarioKind::MeOHStandalone;
  const auto& ely = cat_.at(standalone ? "electrolysis_10mw" : "electrolysis_100mw");
  const double h2_t_per_mwh = ely.coefficient("h2") / cat_.constant("h2_lhv_mwh_per_t");
  const double water = capex("water_purification") * cat_.constant("water_t_per_t_h2") * h2_t_per_mwh;
  add(instantiate_technology(ely, {hub::el3, {{"h2", {hub::h2}}, {"lt_heat", {hub::lt_heat}}}}, hub::electrolysis,
                             annualized_cost(ely, rate_) + water, net()),
      groups::electrolysis);

  const auto& h2c = cat_.at("h2_compressor");
  MultiLink h2comp = instantiate_technology(
      h2c, {hub::h2, {{"electricity", {hub::el2}}}}, hub::h2_compressor,
      annualized_cost(h2c, rate_) + cat_.constant("h2_pipe_km") * capex("h2_pipe"), net());
  h2comp.outputs.insert(h2comp.outputs.begin(), LinkPort{hub::h2_hp, 1.0});
  h2comp.outputs.push_back({hub::dh_heat, -h2c.coefficient("electricity") * intercooling_});
  add(std::move(h2comp), groups::meoh_chain);

  const auto& co2c = cat_.at("co2_compressor");
  MultiLink co2comp = instantiate_technology(
      co2c, {hub::co2_lp, {{"electricity", {hub::el2}}}}, hub::co2_compressor,
      annualized_cost(co2c, rate_) + cat_.constant("co2_pipe_km") * capex("co2_pipe"), net());
  co2comp.outputs.insert(co2comp.outputs.begin(), LinkPort{hub::co2_hp, 1.0});
  co2comp.outputs.push_back({hub::dh_heat, -co2c.coefficient("electricity") * intercooling_});
  add(std::move(co2comp), groups::meoh_chain);

  const auto& syn = cat_.at("methanol_synthesis");
  add(instantiate_technology(syn,
                             {hub::meoh,
                              {{"mt_heat", {hub::mt_heat}},
                               {"electricity", {hub::el2}},
                               {"h2", {hub::h2_hp}},
                               {"co2", {hub::co2_hp}},
                               {"dh_heat", {hub::dh_heat}}}},
                             hub::meoh_synthesis, annualized_cost(syn, rate_), net()),
      groups::meoh_chain);
}

void HubBuilder::heat() {
  struct Boiler {
    const char* name;
    const char* key;
    const char* fuel_bus;
    const char* efficiency;
  };
  // Costs are printed per MW of heat; link capacity is measured on the fuel side.
  for (const Boiler& b : {Boiler{"NG_boiler", "ng_boiler", hub::ng, "ng_boiler_efficiency"},
                          Boiler{"electric_boiler", "electric_boiler", hub::el2, "electric_boiler_efficiency"},
                          Boiler{"biomass_boiler", "biomass_boiler", hub::pellets, "biomass_boiler_efficiency"}}) {
    const double eta = cat_.constant(b.efficiency);
    auto& l = link(b.name, b.fuel_bus, {{hub::mt_heat, eta}}, groups::heat);
    extendable(l, capex(b.key) * eta);
    l.marginal_cost = cat_.at(b.key).variable_om.value_or(0.0) * eta;
  }

  if (cfg_.biochar_enabled) {
    const auto& sky = cat_.at("skyclean");
    add(instantiate_technology(sky,
                               {hub::pellets,
                                {{"electricity", {hub::el2}},
                                 {"mt_heat", {hub::mt_heat}},
                                 {"co2_emissions", {hub::biochar, -1.0}}}},
                               hub::skyclean, annualized_cost(sky, rate_), net()),
        groups::heat);
    auto& credit = link("biochar_credits", hub::biochar, {}, groups::external);
    credit.marginal_cost = -cfg_.co2_tax;
    credit.external_trade = true;
  }

  if (cfg_.dh_enabled) {
    const auto& hp = cat_.at("heat_pump");
    const double cop = cat_.constant("heat_pump_cop");
    MultiLink pump = instantiate_technology(
        hp, {hub::el2, {{"lt_heat", {hub::lt_heat}}, {"dh_heat", {hub::dh_heat}}}}, hub::heat_pump,
        annualized_cost(hp, rate_) * cop, net());
    pump.marginal_cost = hp.variable_om.value_or(0.0) * cop;
    add(std::move(pump), groups::heat);
    auto& sale = link("DH_sale", hub::dh_heat, {{hub::dh_grid, 1.0}}, groups::external);
    sale.marginal_cost = -cat_.constant("dh_sale_price");
    sale.external_trade = true;
    auto& slack = generator("DH_slack", hub::dh_grid, groups::external);
    slack.fixed_capacity = kUnlimited;
  }

  link("DH_to_LT", hub::dh_heat, {{hub::lt_heat, 1.0}}, groups::sink);
  sink("LT_dump", hub::lt_heat);
  sink("CO2_vent", hub::co2_lp);
  sink("pellet_disposal", hub::pellets);
}

void HubBuilder::storage() {
  const double h2_extra = cat_.constant("h2_store_extra_mwh_per_t") / cat_.constant("h2_lhv_mwh_per_t");
  store("H2_store", "H2_store", capex("h2_storage"), groups::meoh_chain);
  link("H2_store_charge", hub::h2_hp, {{"H2_store", 1.0}, {hub::el2, -h2_extra}}, groups::meoh_chain);
  link("H2_store_discharge", "H2_store", {{hub::h2_hp, 1.0}}, groups::meoh_chain);

  store("CO2_cylinders", "CO2_cyl", capex("co2_cylinders"), groups::meoh_chain);
  link("CO2_cyl_charge", hub::co2_hp, {{"CO2_cyl", 1.0}, {hub::el2, -cat_.constant("co2_cylinder_extra_mwh_per_t")}},
       groups::meoh_chain);
  link("CO2_cyl_discharge", "CO2_cyl", {{hub::co2_hp, 1.0}}, groups::meoh_chain);

  store("CO2_liquid_tank", "CO2_liq", capex("co2_liquid_tank"), groups::meoh_chain);
  const auto& liq = cat_.at("co2_liquefaction");
  MultiLink liquefy = instantiate_technology(liq, {hub::co2_lp, {{"electricity", {hub::el2}}}},
                                             hub::co2_liquefaction, annualized_cost(liq, rate_), net());
  liquefy.outputs.insert(liquefy.outputs.begin(), LinkPort{"CO2_liq", 1.0});
  add(std::move(liquefy), groups::meoh_chain);
  const auto& evap = cat_.at("co2_evaporator");
  auto& ev = link(hub::co2_evaporator, "CO2_liq", {{hub::co2_hp, 1.0}}, groups::meoh_chain);
  extendable(ev, annualized_cost(evap, rate_));
  ev.potential = evap.max_rate;
  ev.min_build = evap.min_rate;

  store(hub::battery, "Battery", capex("li_ion_battery"), groups::symbiosis);
  const double c_rate = cat_.at("li_ion_battery").rate_limit.value_or(cat_.constant("battery_c_rate"));
  auto& charge = link(hub::battery_charger, hub::el2, {{"Battery", cat_.constant("battery_charge_efficiency")}},
                      groups::symbiosis);
  extendable(charge, capex("battery_inverter"));
  charge.rate_limit = StoreRateLimit{hub::battery, c_rate};
  auto& discharge = link(hub::battery_discharger, "Battery",
                         {{hub::el2, cat_.constant("battery_discharge_efficiency")}}, groups::symbiosis);
  extendable(discharge, 0.0);
  discharge.rate_limit = StoreRateLimit{hub::battery, c_rate};

  struct Thermal {
    const char* store;
    const char* bus;
    const char* key;
    const char* heat_bus;
    const char* round_trip;
  };
  for (const Thermal& th : {Thermal{"hot_water_tank", "TES", "hot_water_tank", hub::dh_heat, "hot_water_round_trip"},
                            Thermal{"thermal_battery", "ThermalBattery", "thermal_battery", hub::mt_heat,
                                    "thermal_battery_round_trip"}}) {
    const auto& rec = cat_.at(th.key);
    const double eta = std::sqrt(cat_.constant(th.round_trip));
    const double ratio = rec.rate_limit.value_or(cat_.constant("thermal_store_rate"));
    store(th.store, th.bus, annualized_cost(rec, rate_), groups::symbiosis);
    auto& in = link(std::string(th.store) + "_charge", th.heat_bus, {{th.bus, eta}}, groups::symbiosis);
    extendable(in, 0.0);
    in.rate_limit = StoreRateLimit{th.store, ratio};
    auto& out = link(std::string(th.store) + "_discharge", th.bus, {{th.heat_bus, eta}}, groups::symbiosis);
    extendable(out, 0.0);
    out.rate_limit = StoreRateLimit{th.store, ratio};
  }
}

void HubBuilder::loads() {
  Network& n = net();
  n.loads.push_back({"bioCH4_demand", hub::biomethane, std::nullopt, FixedSeries{Profile(biomethane_mw_)}});
  if (hub_.h2_demand > 0.0) n.loads.push_back({hub::h2_load, hub::h2, std::nullopt, AnnualTotal{hub_.h2_demand}});
  n.loads.push_back({hub::meoh_load, hub::meoh, std::nullopt, AnnualTotal{hub_.meoh_demand}});
  // Horizon share of the annual sellable volume.
  const double horizon_total = hub_.external_demand_total * n.snapshots.year_fraction();
  n.loads.push_back({hub::dk1_load, hub::dk1, std::nullopt,
                     FixedSeries{Profile(external_demand(mkt_.dk1_demand, horizon_total))}});
  if (cfg_.dh_enabled)
    n.loads.push_back({"DH_demand", hub::dh_grid, std::nullopt, FixedSeries{Profile(mkt_.dh_demand)}});
}

}  // namespace

Hub build_hub(const ScenarioConfig& config, const Catalog& catalog, const MarketSeries& market) {
  const auto problems = validate_config(config);
  if (!problems.empty()) throw InputError("invalid configuration: " + problems.front());
  return HubBuilder(config, catalog, market).build();
}

}  // namespace hubopt
