#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hubopt/market.hpp"
#include "hubopt/netcore.hpp"

namespace hubopt {

/// One signed conversion ratio of a technology, relative to its reference flow.
struct Coefficient {
  std::string port;
  bool output = false;
  double value = 0.0;
  std::string unit;
};

struct TechnologyRecord {
  std::string key;
  std::string name;
  std::string section;
  std::string reference_flow;
  double investment_cost = 0.0;          ///< as printed, in `investment_unit` per reference unit
  std::string investment_unit = "kEUR";  ///< kEUR, MEUR or kEUR_per_year (already annual)
  std::optional<double> fixed_om_pct;    ///< %/y of investment
  std::optional<double> variable_om;     ///< € per reference unit-hour
  std::optional<double> lifetime;        ///< years
  std::optional<double> default_lifetime;
  std::string source;
  bool applied = true;
  std::string reference_role;  ///< "input", "output" or empty for plain cost rows
  std::vector<Coefficient> coefficients;
  std::optional<double> min_load;
  std::optional<double> ramp_hours;  ///< 0 to 100% load
  std::optional<double> max_capacity;
  std::optional<double> rate_limit;  ///< 1/h relative to energy capacity
  std::optional<double> min_rate;
  std::optional<double> max_rate;

  /// Investment in € per reference unit (or €/y for already-annualized rows).
  double investment_eur() const;
  bool annualized_input() const { return investment_unit == "kEUR_per_year"; }
  /// Printed lifetime, else the documented default. Throws InputError when neither exists.
  double lifetime_years() const;
  bool lifetime_defaulted() const { return !lifetime.has_value(); }
  /// Signed ratio (outputs positive) for `port`; throws InputError if absent.
  double coefficient(const std::string& port) const;
  bool has_port(const std::string& port) const;
};

struct Catalog {
  std::string schema;
  std::string version;
  double discount_rate = 0.07;
  double default_lifetime = 25.0;
  std::map<std::string, double> constants;
  std::vector<TechnologyRecord> records;

  const TechnologyRecord& at(const std::string& key) const;
  double constant(const std::string& name) const;
};

Catalog parse_catalog(const nlohmann::json& doc);
Catalog load_catalog(const std::string& path);
/// Location of the shipped catalog file.
std::string default_catalog_path();
/// Directory holding the shipped data (catalog and synthetic series).
std::string default_data_dir();

/// Annual cost per reference unit: capital recovery plus fixed O&M.
/// `fixed_om_pct` is in percent of the investment per year.
double annuity(double investment, double lifetime, double rate, double fixed_om_pct);

/// Annual € per reference unit of a record at the given discount rate.
double annualized_cost(const TechnologyRecord& record, double rate);

/// Where a record's port attaches. `scale` multiplies the printed ratio.
struct PortBinding {
  std::string bus;
  double scale = 1.0;
};

/// Binds the record's reference flow and each coefficient port to buses.
struct PortMap {
  std::string reference_bus;
  std::map<std::string, PortBinding> ports;
};

/// A multi-link reproducing the record's ratios, min load, ramp limits and costs.
/// `capital_cost` is the annual € per reference unit; variable O&M becomes the marginal cost.
/// Throws InputError for a port without a binding or a binding to an unknown bus.
MultiLink instantiate_technology(const TechnologyRecord& record, const PortMap& ports, const std::string& name,
                                 double capital_cost, const Network& network);

enum class ScenarioKind { H2ToGrid, MeOHStandalone };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(const std::string& text);

/// Which snapshots of the price year are optimized.
struct Horizon {
  std::vector<int> weeks;  ///< representative weeks; empty means contiguous hours
  std::size_t hours = 0;   ///< 0 means the full year
  std::size_t offset = 0;

  bool operator==(const Horizon&) const = default;
};

struct ScenarioConfig {
  std::string name = "case";
  ScenarioKind scenario = ScenarioKind::H2ToGrid;
  double h2_grid_demand = 272.0;  ///< GWh/y, used by H2ToGrid only
  double co2_recovery_ratio = 0.9;
  double co2_tax = 150.0;  ///< €/t
  double max_re = 0.5;
  int price_year = 2019;
  bool dh_enabled = false;
  bool biochar_enabled = false;
  double biomethane_output = 190.0;  ///< GWh/y
  double discount_rate = 0.07;
  std::string data_dir;  ///< market series; empty selects the shipped data for price_year
  Horizon horizon;
  Tariffs tariffs;
  double pellet_price = 380.0;  ///< €/t
  std::string solver = "external";
  /// Accept values outside the enumerated sensitivity grid.
  bool allow_off_grid = false;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Empty when the configuration is usable.
std::vector<std::string> validate_config(const ScenarioConfig& config);
/// Non-fatal remarks, such as biochar credits at a zero CO2 tax.
std::vector<std::string> config_warnings(const ScenarioConfig& config);

nlohmann::json to_json(const ScenarioConfig& config);
/// Unknown keys are rejected so typos do not silently fall back to defaults.
ScenarioConfig config_from_json(const nlohmann::json& doc);
ScenarioConfig load_config(const std::string& path);
/// FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const ScenarioConfig& config);
std::string hash_hex(std::uint64_t hash);
/// The market directory for a configuration.
std::string market_dir(const ScenarioConfig& config);

/// Loads the market directory and applies the configured horizon.
MarketSeries load_case_market(const ScenarioConfig& config);

/// MWh of hydrogen per MWh of electricity.
double alpha_h2(const Catalog& catalog);
/// MWh of methanol per MWh of electricity, counting electrolysis and both compressors.
double alpha_meoh(const Catalog& catalog);
std::string alpha_meoh_derivation(const Catalog& catalog);

/// Biogenic CO2 available per year (t/y) for a biomethane output in GWh/y.
double co2_budget(double biomethane_output_gwh, const Catalog& catalog);
/// Methanol demand (MWh/y) set by the recovered share of the CO2 budget.
double meoh_demand(double biomethane_output_gwh, double recovery_ratio, const Catalog& catalog);

/// Component groups used for cost breakdowns.
namespace groups {
inline constexpr const char* renewables = "renewables";
inline constexpr const char* electrolysis = "electrolysis";
inline constexpr const char* meoh_chain = "meoh_chain";
inline constexpr const char* heat = "heat";
inline constexpr const char* symbiosis = "symbiosis_net";
inline constexpr const char* external = "external";
inline constexpr const char* reference = "reference_plant";
inline constexpr const char* sink = "sink";
}  // namespace groups

struct Hub {
  Network network;
  double alpha_h2 = 0.0;
  double alpha_meoh = 0.0;
  double h2_demand = 0.0;            ///< MWh/y
  double meoh_demand = 0.0;          ///< MWh/y
  double external_demand_total = 0.0;  ///< MWh/y
  std::vector<std::string> warnings;
  std::vector<std::string> log;
};

/// Component and bus names of the built hub.
namespace hub {
inline constexpr const char* dk1 = "DK1";
inline constexpr const char* ng = "NG";
inline constexpr const char* el3 = "El3";
inline constexpr const char* el2 = "El2";
inline constexpr const char* h2 = "H2";
inline constexpr const char* h2_hp = "H2_HP";
inline constexpr const char* co2_lp = "CO2_LP";
inline constexpr const char* co2_hp = "CO2_HP";
inline constexpr const char* biomethane = "bioCH4";
inline constexpr const char* pellets = "Pellets";
inline constexpr const char* mt_heat = "MT_heat";
inline constexpr const char* dh_heat = "DH_heat";
inline constexpr const char* lt_heat = "LT_heat";
inline constexpr const char* meoh = "MeOH";
inline constexpr const char* dh_grid = "DH_grid";
inline constexpr const char* biochar = "bioChar";

inline constexpr const char* grid_to_el3 = "DK1_to_El3";
inline constexpr const char* grid_to_el2 = "DK1_to_El2";
inline constexpr const char* el3_to_grid = "El3_to_DK1";
inline constexpr const char* re_to_hub = "RE_to_hub";
inline constexpr const char* electrolysis = "electrolysis";
inline constexpr const char* meoh_synthesis = "meoh_synthesis";
inline constexpr const char* h2_compressor = "H2_compressor";
inline constexpr const char* co2_compressor = "CO2_compressor";
inline constexpr const char* biomethane_plant = "biomethane_plant";
inline constexpr const char* skyclean = "SkyClean";
inline constexpr const char* heat_pump = "heat_pump";
inline constexpr const char* co2_liquefaction = "CO2_liquefaction";
inline constexpr const char* co2_evaporator = "CO2_evaporator";
inline constexpr const char* battery_charger = "battery_charger";
inline constexpr const char* battery_discharger = "battery_discharger";
inline constexpr const char* battery = "battery";
inline constexpr const char* h2_load = "H2_demand";
inline constexpr const char* meoh_load = "MeOH_demand";
inline constexpr const char* dk1_load = "DK1_demand";
}  // namespace hub

/// Builds the full hub network for a configuration on an already windowed market.
Hub build_hub(const ScenarioConfig& config, const Catalog& catalog, const MarketSeries& market);

}  // namespace hubopt
