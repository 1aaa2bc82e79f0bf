#include "hubopt/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <fmt/format.h>

namespace hubopt {

std::string to_string(FlowUnit unit) { return unit == FlowUnit::MW ? "MW" : "t/h"; }

FlowUnit flow_unit_from_string(const std::string& text) {
  if (text == "MW") return FlowUnit::MW;
  if (text == "t/h") return FlowUnit::TonnesPerHour;
  throw InputError("unknown flow unit '" + text + "'");
}

Snapshots::Snapshots(std::vector<TimePoint> timestamps) : timestamps_(std::move(timestamps)) {}

Snapshots Snapshots::hourly(TimePoint start, std::size_t count) {
  std::vector<TimePoint> ts;
  ts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ts.push_back(start + std::chrono::hours(i));
  return Snapshots(std::move(ts));
}

double Snapshots::horizon_weight() const {
  return timestamps_.empty() ? 0.0 : kHoursPerYear / static_cast<double>(timestamps_.size());
}

double Snapshots::year_fraction() const { return static_cast<double>(timestamps_.size()) / kHoursPerYear; }

std::vector<std::string> Snapshots::check() const {
  std::vector<std::string> problems;
  if (timestamps_.empty()) problems.emplace_back("no snapshots");
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    auto step = timestamps_[i] - timestamps_[i - 1];
    if (step <= std::chrono::seconds(0)) {
      problems.push_back(fmt::format("snapshots not strictly increasing at index {}", i));
      break;
    }
    if (step != std::chrono::hours(1)) {
      problems.push_back(fmt::format("non-uniform snapshot spacing at index {}", i));
      break;
    }
  }
  return problems;
}

TimePoint parse_timestamp(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail[8] = {0};
  int n = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%7s", &y, &mo, &d, &h, &mi, &s, tail);
  if (n < 6) n = std::sscanf(text.c_str(), "%4d-%2d-%2d %2d:%2d:%2d%7s", &y, &mo, &d, &h, &mi, &s, tail);
  if (n < 6) throw InputError("unparseable timestamp '" + text + "'");
  std::string zone(tail);
  if (!zone.empty() && zone != "Z" && zone != "+00:00") {
    throw InputError("timestamp '" + text + "' is not UTC");
  }
  std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(mo)),
                                  std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw InputError("invalid timestamp '" + text + "'");
  return std::chrono::sys_days(ymd) + std::chrono::hours(h) + std::chrono::minutes(mi) +
         std::chrono::seconds(s);
}

std::string format_timestamp(TimePoint t) {
  auto days = std::chrono::floor<std::chrono::days>(t);
  std::chrono::year_month_day ymd{days};
  std::chrono::hh_mm_ss hms{t - days};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

namespace {

template <typename T>
const T* find_named(const std::vector<T>& items, const std::string& name) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& item) { return item.name == name; });
  return it == items.end() ? nullptr : &*it;
}

template <typename T>
std::vector<const T*> sorted_by_name(const std::vector<T>& items) {
  std::vector<const T*> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(&item);
  std::sort(out.begin(), out.end(), [](const T* a, const T* b) { return a->name < b->name; });
  return out;
}

}  // namespace

const Bus* Network::find_bus(const std::string& bus_name) const { return find_named(buses, bus_name); }
const Carrier* Network::find_carrier(const std::string& carrier_name) const {
  return find_named(carriers, carrier_name);
}
const Generator* Network::find_generator(const std::string& gen_name) const {
  return find_named(generators, gen_name);
}
const MultiLink* Network::find_link(const std::string& link_name) const { return find_named(links, link_name); }
const Store* Network::find_store(const std::string& store_name) const { return find_named(stores, store_name); }
const Load* Network::find_load(const std::string& load_name) const { return find_named(loads, load_name); }

const Store* Network::store_on_bus(const std::string& bus_name) const {
  for (const auto& st : stores)
    if (st.bus == bus_name) return &st;
  return nullptr;
}

// ---------------------------------------------------------------------------
// validation

namespace {

class Checker {
 public:
  Checker(const Network& net, std::vector<Violation>& out) : net_(net), out_(out) {}

  void add(const std::string& component, std::string message) {
    out_.push_back({component, std::move(message)});
  }

  void bus_ref(const std::string& component, const std::string& bus,
               const std::optional<std::string>& carrier = std::nullopt) {
    const Bus* b = net_.find_bus(bus);
    if (b == nullptr) {
      add(component, "unknown bus '" + bus + "'");
      return;
    }
    if (carrier && *carrier != b->carrier) {
      add(component, fmt::format("carrier mismatch: component is '{}', bus '{}' carries '{}'", *carrier, bus,
                                 b->carrier));
    }
  }

  void profile(const std::string& component, const std::string& what, const Profile& p) {
    if (!p.is_constant() && p.size() != net_.snapshots.size()) {
      add(component, fmt::format("{} series has length {} but there are {} snapshots", what, p.size(),
                                 net_.snapshots.size()));
    }
    for (double v : p.values()) {
      if (!std::isfinite(v)) {
        add(component, what + " is not finite");
        return;
      }
    }
  }

  void availability(const std::string& component, const Profile& lo, const Profile& hi, double lowest) {
    profile(component, "availability_min", lo);
    profile(component, "availability_max", hi);
    const std::size_t n = std::max<std::size_t>(1, net_.snapshots.size());
    for (std::size_t t = 0; t < n; ++t) {
      double a = lo.size() > t || lo.is_constant() ? lo.at(t) : 0.0;
      double b = hi.size() > t || hi.is_constant() ? hi.at(t) : 1.0;
      if (b > 1.0) {
        add(component, fmt::format("availability > 1 at snapshot {}", t));
        return;
      }
      if (a < lowest) {
        add(component, fmt::format("availability < {} at snapshot {}", lowest, t));
        return;
      }
      if (a > b) {
        add(component, fmt::format("availability min > max at snapshot {}", t));
        return;
      }
    }
  }

  void capacity(const std::string& component, bool extendable, double fixed, double capital_cost,
                const std::optional<double>& potential) {
    if (capital_cost < 0.0 || !std::isfinite(capital_cost)) add(component, "capital cost must be >= 0");
    if (!extendable && (fixed < 0.0 || !std::isfinite(fixed))) add(component, "fixed capacity must be >= 0");
    if (potential && *potential < 0.0) add(component, "potential must be >= 0");
  }

  void ramp(const std::string& component, const std::optional<double>& up, const std::optional<double>& down) {
    if ((up && *up < 0.0) || (down && *down < 0.0)) add(component, "ramp limits must be >= 0");
  }

 private:
  const Network& net_;
  std::vector<Violation>& out_;
};

}  // namespace

std::vector<Violation> validate_network(const Network& network) {
  std::vector<Violation> out;
  Checker check(network, out);

  for (const auto& problem : network.snapshots.check()) check.add("snapshots", problem);

  std::set<std::string> carrier_names;
  for (const auto& c : network.carriers)
    if (!carrier_names.insert(c.name).second) check.add(c.name, "duplicate carrier name");

  std::set<std::string> bus_names;
  for (const auto& b : network.buses) {
    if (!bus_names.insert(b.name).second) check.add(b.name, "duplicate bus name");
    if (!carrier_names.count(b.carrier)) check.add(b.name, "unknown carrier '" + b.carrier + "'");
  }

  std::set<std::string> component_names;
  auto unique = [&](const std::string& name) {
    if (!component_names.insert(name).second) check.add(name, "duplicate component name");
  };

  for (const auto& g : network.generators) {
    unique(g.name);
    check.bus_ref(g.name, g.bus, g.carrier);
    check.capacity(g.name, g.extendable, g.fixed_capacity, g.capital_cost, g.potential);
    check.profile(g.name, "marginal_cost", g.marginal_cost);
    check.availability(g.name, g.availability_min, g.availability_max, 0.0);
    check.ramp(g.name, g.ramp_up, g.ramp_down);
  }

  for (const auto& l : network.links) {
    unique(l.name);
    check.bus_ref(l.name, l.bus0);
    std::set<std::string> touched{l.bus0};
    for (const auto& port : l.outputs) {
      check.bus_ref(l.name, port.bus);
      check.profile(l.name, "efficiency to " + port.bus, port.efficiency);
      if (!touched.insert(port.bus).second) check.add(l.name, "bus '" + port.bus + "' connected twice");
    }
    if (l.reference_sign != -1.0 && l.reference_sign != 1.0) check.add(l.name, "reference sign must be +1 or -1");
    check.capacity(l.name, l.extendable, l.fixed_capacity, l.capital_cost, l.potential);
    check.profile(l.name, "marginal_cost", l.marginal_cost);
    check.availability(l.name, l.availability_min, l.availability_max, -1.0);
    check.ramp(l.name, l.ramp_up, l.ramp_down);
    if (l.min_load < 0.0 || l.min_load >= 1.0) check.add(l.name, "min_load out of [0,1)");
    if (l.min_build && *l.min_build < 0.0) check.add(l.name, "min_build must be >= 0");
    if (l.rate_limit) {
      const Store* st = network.find_store(l.rate_limit->store);
      if (st == nullptr) check.add(l.name, "rate limit refers to unknown store '" + l.rate_limit->store + "'");
      if (l.rate_limit->ratio < 0.0) check.add(l.name, "rate limit ratio must be >= 0");
    }
  }

  std::set<std::string> store_buses;
  for (const auto& s : network.stores) {
    unique(s.name);
    check.bus_ref(s.name, s.bus, s.carrier);
    check.capacity(s.name, s.extendable, s.fixed_energy_capacity, s.capital_cost, s.energy_potential);
    if (s.standing_loss < 0.0 || s.standing_loss >= 1.0) check.add(s.name, "standing loss out of [0,1)");
    if (!store_buses.insert(s.bus).second) check.add(s.name, "more than one store on bus '" + s.bus + "'");
  }

  for (const auto& ld : network.loads) {
    unique(ld.name);
    check.bus_ref(ld.name, ld.bus, ld.carrier);
    if (const auto* fixed = std::get_if<FixedSeries>(&ld.kind)) {
      check.profile(ld.name, "demand", fixed->demand);
      for (double v : fixed->demand.values()) {
        if (v < 0.0) {
          check.add(ld.name, "negative demand");
          break;
        }
      }
    } else {
      const double total = std::get<AnnualTotal>(ld.kind).total;
      if (total < 0.0 || !std::isfinite(total)) check.add(ld.name, "annual total must be >= 0");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// balance signature

namespace {

BalanceTerm make_term(const std::string& component, TermKind kind, double value, int lag = 0) {
  return BalanceTerm{component, kind, value < 0.0 ? -1 : 1, std::abs(value), lag};
}

}  // namespace

std::vector<BalanceTerm> carrier_balance_signature(const Network& network, const std::string& bus,
                                                   std::size_t t) {
  if (network.find_bus(bus) == nullptr) throw InputError("unknown bus '" + bus + "'");
  std::vector<BalanceTerm> terms;
  for (const Generator* g : sorted_by_name(network.generators))
    if (g->bus == bus) terms.push_back(make_term(g->name, TermKind::Generator, 1.0));

  for (const MultiLink* l : sorted_by_name(network.links)) {
    if (l->bus0 == bus) terms.push_back(make_term(l->name, TermKind::Link, l->reference_sign));
    for (const auto& port : l->outputs)
      if (port.bus == bus) terms.push_back(make_term(l->name, TermKind::Link, port.efficiency.at(t)));
  }

  if (const Store* st = network.store_on_bus(bus)) {
    // net discharge: (1 - loss) * e_{t-1} - e_t
    terms.push_back(make_term(st->name, TermKind::StoreLevel, -1.0));
    const bool has_previous = t > 0 || st->cyclic;
    if (has_previous) terms.push_back(make_term(st->name, TermKind::StoreLevel, 1.0 - st->standing_loss, 1));
  }

  for (const Load* ld : sorted_by_name(network.loads))
    if (ld->bus == bus && ld->is_annual()) terms.push_back(make_term(ld->name, TermKind::Delivery, -1.0));
  return terms;
}

double annual_demand_total(const Load& load, const Snapshots& snapshots) {
  const auto* annual = std::get_if<AnnualTotal>(&load.kind);
  if (annual == nullptr) throw InputError("load '" + load.name + "' is a fixed series, not an annual total");
  return annual->total * snapshots.year_fraction();
}

double fixed_demand(const Network& network, const std::string& bus, std::size_t t) {
  double d = 0.0;
  for (const auto& ld : network.loads) {
    if (ld.bus != bus) continue;
    if (const auto* fixed = std::get_if<FixedSeries>(&ld.kind)) d += fixed->demand.at(t);
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json profile_json(const Profile& p) {
  if (p.is_constant()) return p.at(0);
  return p.values();
}

Profile profile_from(const json& j, double fallback) {
  if (j.is_null()) return Profile(fallback);
  if (j.is_number()) return Profile(j.get<double>());
  return Profile(j.get<std::vector<double>>());
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

const json& at_or_null(const json& j, const char* key) {
  static const json null_value;
  return j.contains(key) ? j[key] : null_value;
}

}  // namespace

nlohmann::json to_json(const Network& network) {
  json doc;
  doc["schema"] = "hubopt-network/1";
  doc["name"] = network.name;
  std::vector<std::string> ts;
  ts.reserve(network.snapshots.size());
  for (auto t : network.snapshots.timestamps()) ts.push_back(format_timestamp(t));
  doc["snapshots"] = ts;

  for (const auto& c : network.carriers) doc["carriers"].push_back({{"name", c.name}, {"unit", to_string(c.unit)}});
  for (const auto& b : network.buses) doc["buses"].push_back({{"name", b.name}, {"carrier", b.carrier}});

  for (const auto& g : network.generators) {
    json j{{"name", g.name},
           {"bus", g.bus},
           {"group", g.group},
           {"extendable", g.extendable},
           {"fixed_capacity", g.fixed_capacity},
           {"capital_cost", g.capital_cost},
           {"marginal_cost", profile_json(g.marginal_cost)},
           {"availability_min", profile_json(g.availability_min)},
           {"availability_max", profile_json(g.availability_max)}};
    put_optional(j, "carrier", g.carrier);
    put_optional(j, "potential", g.potential);
    put_optional(j, "ramp_up", g.ramp_up);
    put_optional(j, "ramp_down", g.ramp_down);
    doc["generators"].push_back(j);
  }

  for (const auto& l : network.links) {
    json outputs = json::array();
    for (const auto& p : l.outputs) outputs.push_back({{"bus", p.bus}, {"efficiency", profile_json(p.efficiency)}});
    json j{{"name", l.name},
           {"bus0", l.bus0},
           {"reference_sign", l.reference_sign},
           {"outputs", outputs},
           {"group", l.group},
           {"extendable", l.extendable},
           {"fixed_capacity", l.fixed_capacity},
           {"capital_cost", l.capital_cost},
           {"marginal_cost", profile_json(l.marginal_cost)},
           {"availability_min", profile_json(l.availability_min)},
           {"availability_max", profile_json(l.availability_max)},
           {"min_load", l.min_load},
           {"external_trade", l.external_trade}};
    put_optional(j, "potential", l.potential);
    put_optional(j, "ramp_up", l.ramp_up);
    put_optional(j, "ramp_down", l.ramp_down);
    put_optional(j, "min_build", l.min_build);
    if (l.rate_limit) j["rate_limit"] = {{"store", l.rate_limit->store}, {"ratio", l.rate_limit->ratio}};
    doc["links"].push_back(j);
  }

  for (const auto& s : network.stores) {
    json j{{"name", s.name},
           {"bus", s.bus},
           {"group", s.group},
           {"extendable", s.extendable},
           {"fixed_energy_capacity", s.fixed_energy_capacity},
           {"capital_cost", s.capital_cost},
           {"cyclic", s.cyclic},
           {"standing_loss", s.standing_loss}};
    put_optional(j, "carrier", s.carrier);
    put_optional(j, "energy_potential", s.energy_potential);
    doc["stores"].push_back(j);
  }

  for (const auto& ld : network.loads) {
    json j{{"name", ld.name}, {"bus", ld.bus}};
    put_optional(j, "carrier", ld.carrier);
    if (const auto* fixed = std::get_if<FixedSeries>(&ld.kind)) {
      j["demand"] = profile_json(fixed->demand);
    } else {
      j["annual_total"] = std::get<AnnualTotal>(ld.kind).total;
    }
    doc["loads"].push_back(j);
  }
  for (const char* key : {"carriers", "buses", "generators", "links", "stores", "loads"})
    if (!doc.contains(key)) doc[key] = json::array();
  return doc;
}

Network network_from_json(const nlohmann::json& doc) {
  try {
    Network net;
    net.name = doc.value("name", "");
    std::vector<TimePoint> ts;
    for (const auto& s : doc.at("snapshots")) ts.push_back(parse_timestamp(s.get<std::string>()));
    net.snapshots = Snapshots(std::move(ts));

    for (const auto& c : doc.at("carriers"))
      net.carriers.push_back({c.at("name"), flow_unit_from_string(c.value("unit", "MW"))});
    for (const auto& b : doc.at("buses")) net.buses.push_back({b.at("name"), b.at("carrier")});

    for (const auto& j : doc.at("generators")) {
      Generator g;
      g.name = j.at("name");
      g.bus = j.at("bus");
      g.group = j.value("group", "");
      g.carrier = get_optional<std::string>(j, "carrier");
      g.extendable = j.value("extendable", false);
      g.fixed_capacity = j.value("fixed_capacity", 0.0);
      g.capital_cost = j.value("capital_cost", 0.0);
      g.marginal_cost = profile_from(at_or_null(j, "marginal_cost"), 0.0);
      g.availability_min = profile_from(at_or_null(j, "availability_min"), 0.0);
      g.availability_max = profile_from(at_or_null(j, "availability_max"), 1.0);
      g.potential = get_optional<double>(j, "potential");
      g.ramp_up = get_optional<double>(j, "ramp_up");
      g.ramp_down = get_optional<double>(j, "ramp_down");
      net.generators.push_back(std::move(g));
    }

    for (const auto& j : doc.at("links")) {
      MultiLink l;
      l.name = j.at("name");
      l.bus0 = j.at("bus0");
      l.reference_sign = j.value("reference_sign", -1.0);
      for (const auto& p : j.at("outputs"))
        l.outputs.push_back({p.at("bus"), profile_from(at_or_null(p, "efficiency"), 1.0)});
      l.group = j.value("group", "");
      l.extendable = j.value("extendable", false);
      l.fixed_capacity = j.value("fixed_capacity", 0.0);
      l.capital_cost = j.value("capital_cost", 0.0);
      l.marginal_cost = profile_from(at_or_null(j, "marginal_cost"), 0.0);
      l.availability_min = profile_from(at_or_null(j, "availability_min"), 0.0);
      l.availability_max = profile_from(at_or_null(j, "availability_max"), 1.0);
      l.potential = get_optional<double>(j, "potential");
      l.ramp_up = get_optional<double>(j, "ramp_up");
      l.ramp_down = get_optional<double>(j, "ramp_down");
      l.min_load = j.value("min_load", 0.0);
      l.min_build = get_optional<double>(j, "min_build");
      l.external_trade = j.value("external_trade", false);
      if (j.contains("rate_limit"))
        l.rate_limit = StoreRateLimit{j["rate_limit"].at("store"), j["rate_limit"].at("ratio")};
      net.links.push_back(std::move(l));
    }

    for (const auto& j : doc.at("stores")) {
      Store s;
      s.name = j.at("name");
      s.bus = j.at("bus");
      s.group = j.value("group", "");
      s.carrier = get_optional<std::string>(j, "carrier");
      s.extendable = j.value("extendable", false);
      s.fixed_energy_capacity = j.value("fixed_energy_capacity", 0.0);
      s.capital_cost = j.value("capital_cost", 0.0);
      s.energy_potential = get_optional<double>(j, "energy_potential");
      s.cyclic = j.value("cyclic", true);
      s.standing_loss = j.value("standing_loss", 0.0);
      net.stores.push_back(std::move(s));
    }

    for (const auto& j : doc.at("loads")) {
      Load ld;
      ld.name = j.at("name");
      ld.bus = j.at("bus");
      ld.carrier = get_optional<std::string>(j, "carrier");
      if (j.contains("annual_total")) {
        ld.kind = AnnualTotal{j["annual_total"].get<double>()};
      } else {
        ld.kind = FixedSeries{profile_from(j.at("demand"), 0.0)};
      }
      net.loads.push_back(std::move(ld));
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed network document: ") + e.what());
  }
}

}  // namespace hubopt
