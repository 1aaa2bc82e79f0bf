#include "hubopt/lpform.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace hubopt {

std::string to_string(RowKind kind) {
  switch (kind) {
    case RowKind::NodalBalance: return "nodal_balance";
    case RowKind::GenUpper: return "gen_upper";
    case RowKind::GenLower: return "gen_lower";
    case RowKind::LinkUpper: return "link_upper";
    case RowKind::LinkLower: return "link_lower";
    case RowKind::StoreBounds: return "store_bounds";
    case RowKind::StoreContinuity: return "store_continuity";
    case RowKind::RampUp: return "ramp_up";
    case RowKind::RampDown: return "ramp_down";
    case RowKind::AnnualDemand: return "annual_demand";
    case RowKind::Potential: return "potential";
    case RowKind::RateLimit: return "rate_limit";
  }
  return "unknown";
}

std::string to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::GenCapacity: return "gen_capacity";
    case ColumnKind::LinkCapacity: return "link_capacity";
    case ColumnKind::StoreCapacity: return "store_capacity";
    case ColumnKind::GenDispatch: return "gen_dispatch";
    case ColumnKind::LinkFlow: return "link_flow";
    case ColumnKind::StoreLevel: return "store_level";
    case ColumnKind::Delivery: return "delivery";
  }
  return "unknown";
}

namespace lpnames {
std::string capacity(const std::string& component) { return "cap." + component; }
std::string dispatch(const std::string& component, std::size_t t) { return fmt::format("p.{}.{}", component, t); }
std::string level(const std::string& store, std::size_t t) { return fmt::format("soc.{}.{}", store, t); }
std::string delivery(const std::string& load, std::size_t t) { return fmt::format("dlv.{}.{}", load, t); }
std::string balance(const std::string& bus, std::size_t t) { return fmt::format("bal.{}.{}", bus, t); }
std::string annual_demand(const std::string& load) { return "demand." + load; }
}  // namespace lpnames

// ---------------------------------------------------------------------------
// LpProblem

std::size_t LpProblem::add_column(LpColumn column) {
  const std::size_t idx = columns_.size();
  if (!column_by_name_.emplace(column.name, idx).second)
    throw InputError("duplicate LP column name '" + column.name + "'");
  columns_.push_back(std::move(column));
  return idx;
}

std::size_t LpProblem::add_row(LpRow row) {
  const std::size_t idx = rows_.size();
  if (!row_by_name_.emplace(row.name, idx).second) throw InputError("duplicate LP row name '" + row.name + "'");
  rows_.push_back(std::move(row));
  return idx;
}

void LpProblem::add_entry(std::size_t row, std::size_t col, double value) { entries_.push_back({row, col, value}); }

std::size_t LpProblem::column_index(const std::string& name) const {
  auto it = column_by_name_.find(name);
  if (it == column_by_name_.end()) throw InputError("unknown LP column '" + name + "'");
  return it->second;
}

std::size_t LpProblem::row_index(const std::string& name) const {
  auto it = row_by_name_.find(name);
  if (it == row_by_name_.end()) throw InputError("unknown LP row '" + name + "'");
  return it->second;
}

std::vector<std::pair<std::size_t, double>> LpProblem::row_entries(std::size_t row) const {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& e : entries_)
    if (e.row == row) out.emplace_back(e.col, e.value);
  return out;
}

std::vector<std::string> LpProblem::check() const {
  std::vector<std::string> problems;
  if (column_by_name_.size() != columns_.size()) problems.emplace_back("duplicate column names");
  if (row_by_name_.size() != rows_.size()) problems.emplace_back("duplicate row names");
  for (const auto& c : columns_) {
    if (c.lower > c.upper) problems.push_back("column '" + c.name + "' has lower > upper");
    if (std::isnan(c.cost)) problems.push_back("column '" + c.name + "' has NaN cost");
  }
  for (const auto& e : entries_) {
    if (e.row >= rows_.size() || e.col >= columns_.size()) {
      problems.emplace_back("entry references a missing row or column");
      break;
    }
    if (!std::isfinite(e.value)) problems.push_back("non-finite coefficient in row '" + rows_[e.row].name + "'");
  }
  return problems;
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ULL;
    }
  }
  void text(const std::string& s) {
    bytes(s.data(), s.size());
    bytes("\0", 1);
  }
  void number(double v) { bytes(&v, sizeof v); }
  void integer(std::uint64_t v) { bytes(&v, sizeof v); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

}  // namespace

std::uint64_t LpProblem::fingerprint() const {
  Fnv1a h;
  for (const auto& c : columns_) {
    h.text(c.name);
    h.number(c.lower);
    h.number(c.upper);
    h.number(c.cost);
  }
  for (const auto& r : rows_) {
    h.text(r.name);
    h.integer(static_cast<std::uint64_t>(r.sense));
    h.number(r.rhs);
  }
  for (const auto& e : entries_) {
    h.integer(e.row);
    h.integer(e.col);
    h.number(e.value);
  }
  return h.value();
}

// ---------------------------------------------------------------------------
// LpBuilder

namespace {

template <typename T>
std::vector<const T*> sorted_ptrs(const std::vector<T>& items) {
  std::vector<const T*> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(&item);
  std::sort(out.begin(), out.end(), [](const T* a, const T* b) { return a->name < b->name; });
  return out;
}

bool has_negative(const Profile& p) {
  return std::any_of(p.values().begin(), p.values().end(), [](double v) { return v < 0.0; });
}

}  // namespace

LpBuilder::LpBuilder(const Network& network) : net_(network), n_(network.snapshots.size()) {
  generators_ = sorted_ptrs(net_.generators);
  links_ = sorted_ptrs(net_.links);
  stores_ = sorted_ptrs(net_.stores);
  buses_ = sorted_ptrs(net_.buses);
  for (const Load* ld : sorted_ptrs(net_.loads))
    if (ld->is_annual()) annual_loads_.push_back(ld);
}

void LpBuilder::build_columns() {
  auto add_capacity = [&](const std::string& name, ColumnKind kind) {
    layout_.capacity[name] =
        problem_.add_column({lpnames::capacity(name), 0.0, kInf, 0.0, ColumnTag{kind, name, -1}});
  };
  auto add_series = [&](std::unordered_map<std::string, std::size_t>& index, const std::string& name,
                        ColumnKind kind, double lower, auto namer) {
    index[name] = problem_.num_columns();
    for (std::size_t t = 0; t < n_; ++t)
      problem_.add_column({namer(name, t), lower, kInf, 0.0, ColumnTag{kind, name, static_cast<int>(t)}});
  };

  for (const Generator* g : generators_) {
    if (g->extendable) add_capacity(g->name, ColumnKind::GenCapacity);
    add_series(layout_.dispatch, g->name, ColumnKind::GenDispatch, 0.0, lpnames::dispatch);
  }
  for (const MultiLink* l : links_) {
    if (l->extendable) add_capacity(l->name, ColumnKind::LinkCapacity);
    const double lower = has_negative(l->availability_min) ? -kInf : 0.0;
    add_series(layout_.dispatch, l->name, ColumnKind::LinkFlow, lower, lpnames::dispatch);
  }
  for (const Store* s : stores_) {
    if (s->extendable) add_capacity(s->name, ColumnKind::StoreCapacity);
    add_series(layout_.level, s->name, ColumnKind::StoreLevel, 0.0, lpnames::level);
  }
  for (const Load* ld : annual_loads_)
    add_series(layout_.delivery, ld->name, ColumnKind::Delivery, 0.0, lpnames::delivery);
}

void LpBuilder::build_objective() {
  auto& cols = problem_.mutable_columns();
  const double prorate = net_.snapshots.year_fraction();
  for (const Generator* g : generators_) {
    if (g->extendable) cols[layout_.capacity.at(g->name)].cost = g->capital_cost * prorate;
    const std::size_t base = layout_.dispatch.at(g->name);
    for (std::size_t t = 0; t < n_; ++t) cols[base + t].cost = g->marginal_cost.at(t);
  }
  for (const MultiLink* l : links_) {
    if (l->extendable) cols[layout_.capacity.at(l->name)].cost = l->capital_cost * prorate;
    const std::size_t base = layout_.dispatch.at(l->name);
    for (std::size_t t = 0; t < n_; ++t) cols[base + t].cost = l->marginal_cost.at(t);
  }
  for (const Store* s : stores_)
    if (s->extendable) cols[layout_.capacity.at(s->name)].cost = s->capital_cost * prorate;
}

void LpBuilder::emit_nodal_balance() {
  // Adjacency per bus, in the same order as carrier_balance_signature.
  struct LinkTerm {
    std::size_t base;
    const Profile* efficiency;
    double constant;
  };
  std::map<std::string, std::vector<std::size_t>> gen_terms;
  std::map<std::string, std::vector<LinkTerm>> link_terms;
  std::map<std::string, std::vector<std::size_t>> delivery_terms;
  for (const Generator* g : generators_) gen_terms[g->bus].push_back(layout_.dispatch.at(g->name));
  for (const MultiLink* l : links_) {
    const std::size_t base = layout_.dispatch.at(l->name);
    link_terms[l->bus0].push_back({base, nullptr, l->reference_sign});
    for (const auto& port : l->outputs) link_terms[port.bus].push_back({base, &port.efficiency, 0.0});
  }
  for (const Load* ld : annual_loads_) delivery_terms[ld->bus].push_back(layout_.delivery.at(ld->name));

  for (const Bus* bus : buses_) {
    const Store* store = net_.store_on_bus(bus->name);
    const auto& gens = gen_terms[bus->name];
    const auto& lnks = link_terms[bus->name];
    const auto& dlvs = delivery_terms[bus->name];
    const bool empty = gens.empty() && lnks.empty() && dlvs.empty() && store == nullptr;
    for (std::size_t t = 0; t < n_; ++t) {
      const double demand = fixed_demand(net_, bus->name, t);
      if (empty && demand > 0.0)
        warnings_.push_back(
            fmt::format("bus '{}' has demand {} at snapshot {} but nothing attached (infeasible)", bus->name,
                        demand, t));
      RowTag tag{store ? RowKind::StoreContinuity : RowKind::NodalBalance, store ? store->name : "", bus->name,
                 static_cast<int>(t)};
      const std::size_t row = problem_.add_row({lpnames::balance(bus->name, t), Sense::Equal, demand, tag});
      for (std::size_t base : gens) problem_.add_entry(row, base + t, 1.0);
      for (const auto& term : lnks)
        problem_.add_entry(row, term.base + t, term.efficiency ? term.efficiency->at(t) : term.constant);
      if (store) {
        const std::size_t lvl = layout_.level.at(store->name);
        problem_.add_entry(row, lvl + t, -1.0);
        if (t > 0) {
          problem_.add_entry(row, lvl + t - 1, 1.0 - store->standing_loss);
        } else if (store->cyclic) {
          problem_.add_entry(row, lvl + n_ - 1, 1.0 - store->standing_loss);
        }
      }
      for (std::size_t base : dlvs) problem_.add_entry(row, base + t, -1.0);
    }
  }
}

void LpBuilder::emit_store_continuity() {
  // Store buses carry their state equation in place of the plain balance; both are
  // emitted by emit_nodal_balance so that every bus has exactly one row per snapshot.
  // This stage only checks that the row exists for each store.
  for (const Store* s : stores_)
    for (std::size_t t = 0; t < n_; ++t) (void)problem_.row_index(lpnames::balance(s->bus, t));
}

LpBuilder::Capacity LpBuilder::capacity_of(const std::string& component, bool extendable, double fixed) const {
  if (extendable) return {static_cast<std::ptrdiff_t>(layout_.capacity.at(component)), 0.0};
  return {-1, fixed};
}

void LpBuilder::add_capacity_term(std::size_t row, const Capacity& cap, double coefficient, double& rhs) {
  if (cap.column >= 0) {
    problem_.add_entry(row, static_cast<std::size_t>(cap.column), coefficient);
  } else {
    rhs -= coefficient * cap.fixed;
  }
}

void LpBuilder::emit_capacity_coupling() {
  auto bounded_pair = [&](const std::string& name, const Capacity& cap, std::size_t base, const Profile& hi,
                          const Profile& lo, double min_load, RowKind upper_kind, RowKind lower_kind) {
    for (std::size_t t = 0; t < n_; ++t) {
      const std::size_t r = problem_.add_row({fmt::format("up.{}.{}", name, t), Sense::LessEqual, 0.0,
                                              RowTag{upper_kind, name, "", static_cast<int>(t)}});
      problem_.add_entry(r, base + t, 1.0);
      double rhs = 0.0;
      add_capacity_term(r, cap, -hi.at(t), rhs);
      problem_.mutable_rows()[r].rhs = rhs;
    }
    for (std::size_t t = 0; t < n_; ++t) {
      const std::size_t r = problem_.add_row({fmt::format("lo.{}.{}", name, t), Sense::GreaterEqual, 0.0,
                                              RowTag{lower_kind, name, "", static_cast<int>(t)}});
      problem_.add_entry(r, base + t, 1.0);
      double rhs = 0.0;
      add_capacity_term(r, cap, -std::max(lo.at(t), min_load), rhs);
      problem_.mutable_rows()[r].rhs = rhs;
    }
  };
  auto potential_row = [&](const std::string& name, bool extendable, const std::optional<double>& potential) {
    if (!extendable || !potential) return;
    const std::size_t r = problem_.add_row(
        {"pot." + name, Sense::LessEqual, *potential, RowTag{RowKind::Potential, name, "", -1}});
    problem_.add_entry(r, layout_.capacity.at(name), 1.0);
  };

  for (const Generator* g : generators_) {
    const Capacity cap = capacity_of(g->name, g->extendable, g->fixed_capacity);
    bounded_pair(g->name, cap, layout_.dispatch.at(g->name), g->availability_max, g->availability_min, 0.0,
                 RowKind::GenUpper, RowKind::GenLower);
    potential_row(g->name, g->extendable, g->potential);
  }
  for (const MultiLink* l : links_) {
    const Capacity cap = capacity_of(l->name, l->extendable, l->fixed_capacity);
    bounded_pair(l->name, cap, layout_.dispatch.at(l->name), l->availability_max, l->availability_min,
                 l->min_load, RowKind::LinkUpper, RowKind::LinkLower);
    potential_row(l->name, l->extendable, l->potential);
  }
  for (const Store* s : stores_) {
    const Capacity cap = capacity_of(s->name, s->extendable, s->fixed_energy_capacity);
    const std::size_t base = layout_.level.at(s->name);
    for (std::size_t t = 0; t < n_; ++t) {
      const std::size_t r = problem_.add_row({fmt::format("ebound.{}.{}", s->name, t), Sense::LessEqual, 0.0,
                                              RowTag{RowKind::StoreBounds, s->name, s->bus, static_cast<int>(t)}});
      problem_.add_entry(r, base + t, 1.0);
      double rhs = 0.0;
      add_capacity_term(r, cap, -1.0, rhs);
      problem_.mutable_rows()[r].rhs = rhs;
    }
    potential_row(s->name, s->extendable, s->energy_potential);
  }
  for (const MultiLink* l : links_) {
    if (!l->rate_limit) continue;
    const Store* s = net_.find_store(l->rate_limit->store);
    const std::size_t r = problem_.add_row(
        {"rate." + l->name, Sense::LessEqual, 0.0, RowTag{RowKind::RateLimit, l->name, "", -1}});
    double rhs = 0.0;
    add_capacity_term(r, capacity_of(l->name, l->extendable, l->fixed_capacity), 1.0, rhs);
    add_capacity_term(r, capacity_of(s->name, s->extendable, s->fixed_energy_capacity), -l->rate_limit->ratio, rhs);
    problem_.mutable_rows()[r].rhs = rhs;
  }
}

void LpBuilder::emit_ramp_rows() {
  auto ramps = [&](const std::string& name, const Capacity& cap, std::size_t base, const std::optional<double>& up,
                   const std::optional<double>& down) {
    for (std::size_t t = 1; t < n_; ++t) {
      if (up) {
        const std::size_t r = problem_.add_row({fmt::format("rampup.{}.{}", name, t), Sense::LessEqual, 0.0,
                                                RowTag{RowKind::RampUp, name, "", static_cast<int>(t)}});
        problem_.add_entry(r, base + t, 1.0);
        problem_.add_entry(r, base + t - 1, -1.0);
        double rhs = 0.0;
        add_capacity_term(r, cap, -*up, rhs);
        problem_.mutable_rows()[r].rhs = rhs;
      }
      if (down) {
        const std::size_t r = problem_.add_row({fmt::format("rampdn.{}.{}", name, t), Sense::GreaterEqual, 0.0,
                                                RowTag{RowKind::RampDown, name, "", static_cast<int>(t)}});
        problem_.add_entry(r, base + t, 1.0);
        problem_.add_entry(r, base + t - 1, -1.0);
        double rhs = 0.0;
        add_capacity_term(r, cap, *down, rhs);
        problem_.mutable_rows()[r].rhs = rhs;
      }
    }
  };
  for (const Generator* g : generators_)
    ramps(g->name, capacity_of(g->name, g->extendable, g->fixed_capacity), layout_.dispatch.at(g->name), g->ramp_up,
          g->ramp_down);
  for (const MultiLink* l : links_)
    ramps(l->name, capacity_of(l->name, l->extendable, l->fixed_capacity), layout_.dispatch.at(l->name), l->ramp_up,
          l->ramp_down);
}

void LpBuilder::emit_annual_demand() {
  for (const Load* ld : annual_loads_) {
    const std::size_t r =
        problem_.add_row({lpnames::annual_demand(ld->name), Sense::Equal, annual_demand_total(*ld, net_.snapshots),
                          RowTag{RowKind::AnnualDemand, ld->name, ld->bus, -1}});
    const std::size_t base = layout_.delivery.at(ld->name);
    for (std::size_t t = 0; t < n_; ++t) problem_.add_entry(r, base + t, 1.0);
  }
}

LpProblem assemble(const Network& network, std::vector<std::string>* warnings) {
  const auto violations = validate_network(network);
  if (!violations.empty()) {
    std::string msg = "network failed validation:";
    for (const auto& v : violations) msg += "\n  " + v.component + ": " + v.message;
    throw InputError(msg);
  }
  LpBuilder builder(network);
  builder.build_columns();
  builder.build_objective();
  builder.emit_nodal_balance();
  builder.emit_store_continuity();
  builder.emit_capacity_coupling();
  builder.emit_ramp_rows();
  builder.emit_annual_demand();
  if (warnings) *warnings = builder.warnings();
  LpProblem problem = builder.take();
  auto problems = problem.check();
  if (!problems.empty()) throw InputError("assembled LP is inconsistent: " + problems.front());
  return problem;
}

}  // namespace hubopt
