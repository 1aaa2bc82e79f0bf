#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace hubopt {

/// Raised for malformed inputs (unknown names, bad files, out-of-range configuration).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hours in the reference year used for annual quantities and horizon prorating.
inline constexpr double kHoursPerYear = 8760.0;

enum class FlowUnit { MW, TonnesPerHour };

std::string to_string(FlowUnit unit);
FlowUnit flow_unit_from_string(const std::string& text);

struct Carrier {
  std::string name;
  FlowUnit unit = FlowUnit::MW;
};

struct Bus {
  std::string name;
  std::string carrier;
};

/// A value that is either constant over the horizon or given per snapshot.
class Profile {
 public:
  Profile() = default;
  Profile(double constant) : values_{constant} {}  // NOLINT(google-explicit-constructor)
  explicit Profile(std::vector<double> series) : values_(std::move(series)) {}

  double at(std::size_t t) const { return values_.size() == 1 ? values_[0] : values_.at(t); }
  bool is_constant() const { return values_.size() == 1; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const Profile&) const = default;

 private:
  std::vector<double> values_{0.0};
};

using TimePoint = std::chrono::sys_seconds;

/// Ordered hourly instants of the optimisation horizon.
class Snapshots {
 public:
  Snapshots() = default;
  explicit Snapshots(std::vector<TimePoint> timestamps);

  /// `count` consecutive hours starting at `start`.
  static Snapshots hourly(TimePoint start, std::size_t count);

  std::size_t size() const { return timestamps_.size(); }
  const std::vector<TimePoint>& timestamps() const { return timestamps_; }
  /// Share of the reference year covered by the horizon, inverted: 8760 / N.
  double horizon_weight() const;
  /// N / 8760, the factor applied to annual quantities.
  double year_fraction() const;

  /// Empty when strictly increasing with uniform one-hour spacing and N >= 1.
  std::vector<std::string> check() const;

  bool operator==(const Snapshots&) const = default;

 private:
  std::vector<TimePoint> timestamps_;
};

TimePoint parse_timestamp(const std::string& text);
std::string format_timestamp(TimePoint t);

struct Generator {
  std::string name;
  std::string bus;
  std::string group;
  std::optional<std::string> carrier;  ///< asserted carrier of the attached bus
  bool extendable = false;
  double fixed_capacity = 0.0;
  double capital_cost = 0.0;  ///< € per unit of capacity per year (prorated by lpform)
  Profile marginal_cost = 0.0;
  Profile availability_min = 0.0;
  Profile availability_max = 1.0;
  std::optional<double> potential;
  std::optional<double> ramp_up;    ///< per unit of capacity per hour
  std::optional<double> ramp_down;  ///< per unit of capacity per hour
};

struct LinkPort {
  std::string bus;
  Profile efficiency = 1.0;
};

/// Upper bound on a link's capacity proportional to a store's energy capacity.
struct StoreRateLimit {
  std::string store;
  double ratio = 1.0;  ///< capacity per unit of energy capacity (1/h)
};

/// Conversion process with one flow variable and fixed ratios to several buses.
///
/// The flow is measured on `bus0`. `reference_sign` is -1 when the flow is drawn from
/// bus0 (the usual input convention) and +1 when bus0 receives the flow, as for
/// processes whose reference flow is their product.
struct MultiLink {
  std::string name;
  std::string bus0;
  double reference_sign = -1.0;
  std::vector<LinkPort> outputs;
  std::string group;
  bool extendable = false;
  double fixed_capacity = 0.0;
  double capital_cost = 0.0;
  Profile marginal_cost = 0.0;
  Profile availability_min = 0.0;
  Profile availability_max = 1.0;
  std::optional<double> potential;
  std::optional<double> ramp_up;
  std::optional<double> ramp_down;
  double min_load = 0.0;
  /// Semi-continuous threshold: when built, capacity must be at least this much.
  /// The LP cannot express it; the case runner resolves it by branching.
  std::optional<double> min_build;
  std::optional<StoreRateLimit> rate_limit;
  /// Set for links trading with external grids at exogenous prices.
  bool external_trade = false;
};

struct Store {
  std::string name;
  std::string bus;
  std::string group;
  std::optional<std::string> carrier;
  bool extendable = false;
  double fixed_energy_capacity = 0.0;
  double capital_cost = 0.0;  ///< € per unit of energy capacity per year
  std::optional<double> energy_potential;
  bool cyclic = true;
  double standing_loss = 0.0;  ///< fraction lost per hour
};

struct FixedSeries {
  Profile demand;
};

struct AnnualTotal {
  double total = 0.0;  ///< ref-unit-hours per year
};

struct Load {
  std::string name;
  std::string bus;
  std::optional<std::string> carrier;
  std::variant<FixedSeries, AnnualTotal> kind;

  bool is_annual() const { return std::holds_alternative<AnnualTotal>(kind); }
};

class Network {
 public:
  std::string name;
  std::vector<Carrier> carriers;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<MultiLink> links;
  std::vector<Store> stores;
  std::vector<Load> loads;
  Snapshots snapshots;

  const Bus* find_bus(const std::string& bus_name) const;
  const Carrier* find_carrier(const std::string& carrier_name) const;
  const Generator* find_generator(const std::string& gen_name) const;
  const MultiLink* find_link(const std::string& link_name) const;
  const Store* find_store(const std::string& store_name) const;
  const Load* find_load(const std::string& load_name) const;
  /// The store whose state equation replaces the balance of `bus_name`, if any.
  const Store* store_on_bus(const std::string& bus_name) const;
};

struct Violation {
  std::string component;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Structural and numeric checks; an empty report means the network is valid.
std::vector<Violation> validate_network(const Network& network);

enum class TermKind { Generator, Link, StoreLevel, Delivery };

/// One term of a bus balance: `sign * coefficient * variable(t - lag)`.
struct BalanceTerm {
  std::string component;
  TermKind kind = TermKind::Generator;
  int sign = 1;
  double coefficient = 1.0;
  int lag = 0;

  bool operator==(const BalanceTerm&) const = default;
};

/// Every term the balance of `bus` carries at snapshot `t`, in emission order.
/// Throws InputError for an unknown bus.
std::vector<BalanceTerm> carrier_balance_signature(const Network& network, const std::string& bus,
                                                   std::size_t t = 0);

/// Annual demand prorated to the horizon: D * N / 8760.
double annual_demand_total(const Load& load, const Snapshots& snapshots);

/// Fixed demand of `bus` at snapshot t (sum over fixed-series loads).
double fixed_demand(const Network& network, const std::string& bus, std::size_t t);

nlohmann::json to_json(const Network& network);
Network network_from_json(const nlohmann::json& doc);

}  // namespace hubopt
