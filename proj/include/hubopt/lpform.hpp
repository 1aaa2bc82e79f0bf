#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "hubopt/netcore.hpp"

namespace hubopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Equal, LessEqual, GreaterEqual };

enum class RowKind {
  NodalBalance,
  GenUpper,
  GenLower,
  LinkUpper,
  LinkLower,
  StoreBounds,
  StoreContinuity,
  RampUp,
  RampDown,
  AnnualDemand,
  Potential,
  RateLimit,
};

enum class ColumnKind { GenCapacity, LinkCapacity, StoreCapacity, GenDispatch, LinkFlow, StoreLevel, Delivery };

std::string to_string(RowKind kind);
std::string to_string(ColumnKind kind);

/// Back-reference from an LP row to the network object it encodes.
struct RowTag {
  RowKind kind = RowKind::NodalBalance;
  std::string component;  ///< generator/link/store/load name; empty for balances
  std::string bus;        ///< bus for balance and continuity rows
  int snapshot = -1;      ///< -1 for rows without a time index
};

struct ColumnTag {
  ColumnKind kind = ColumnKind::GenDispatch;
  std::string component;
  int snapshot = -1;
};

struct LpColumn {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  ColumnTag tag;
};

struct LpRow {
  std::string name;
  Sense sense = Sense::Equal;
  double rhs = 0.0;
  RowTag tag;
};

struct LpEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Sparse minimisation LP with named rows and columns.
class LpProblem {
 public:
  std::size_t add_column(LpColumn column);
  std::size_t add_row(LpRow row);
  /// Appends a coefficient; zero values are kept so row structure is visible to tests.
  void add_entry(std::size_t row, std::size_t col, double value);

  std::size_t num_columns() const { return columns_.size(); }
  std::size_t num_rows() const { return rows_.size(); }
  const std::vector<LpColumn>& columns() const { return columns_; }
  const std::vector<LpRow>& rows() const { return rows_; }
  const std::vector<LpEntry>& entries() const { return entries_; }
  std::vector<LpColumn>& mutable_columns() { return columns_; }
  std::vector<LpRow>& mutable_rows() { return rows_; }

  /// Index of a named column/row; throws InputError if absent.
  std::size_t column_index(const std::string& name) const;
  std::size_t row_index(const std::string& name) const;
  bool has_column(const std::string& name) const { return column_by_name_.count(name) != 0; }
  bool has_row(const std::string& name) const { return row_by_name_.count(name) != 0; }

  /// Entries of a row as (column, value), in insertion order.
  std::vector<std::pair<std::size_t, double>> row_entries(std::size_t row) const;

  /// Empty when names are unique, entries reference existing rows/columns and bounds are ordered.
  std::vector<std::string> check() const;

  /// FNV-1a hash over names, bounds, costs, senses, right-hand sides and coefficients.
  std::uint64_t fingerprint() const;

 private:
  std::vector<LpColumn> columns_;
  std::vector<LpRow> rows_;
  std::vector<LpEntry> entries_;
  std::unordered_map<std::string, std::size_t> column_by_name_;
  std::unordered_map<std::string, std::size_t> row_by_name_;
};

/// Column indices of every network variable, produced by build_columns.
struct ColumnLayout {
  std::unordered_map<std::string, std::size_t> capacity;  ///< extendable components only
  std::unordered_map<std::string, std::size_t> dispatch;  ///< first of N consecutive columns
  std::unordered_map<std::string, std::size_t> level;     ///< store energy level, N columns
  std::unordered_map<std::string, std::size_t> delivery;  ///< annual loads, N columns
};

/// Staged construction of the LP; `assemble` runs every stage in order.
class LpBuilder {
 public:
  explicit LpBuilder(const Network& network);

  void build_columns();
  void build_objective();
  void emit_nodal_balance();
  void emit_store_continuity();
  void emit_capacity_coupling();
  void emit_ramp_rows();
  void emit_annual_demand();

  const LpProblem& problem() const { return problem_; }
  LpProblem take() { return std::move(problem_); }
  const ColumnLayout& layout() const { return layout_; }
  /// Non-fatal findings, e.g. demand on a bus nothing can supply.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Capacity {
    std::ptrdiff_t column = -1;  ///< -1 when the capacity is a constant
    double fixed = 0.0;
  };
  Capacity capacity_of(const std::string& component, bool extendable, double fixed) const;
  void add_capacity_term(std::size_t row, const Capacity& cap, double coefficient, double& rhs);

  const Network& net_;
  std::size_t n_;
  LpProblem problem_;
  ColumnLayout layout_;
  std::vector<std::string> warnings_;
  std::vector<const Generator*> generators_;
  std::vector<const MultiLink*> links_;
  std::vector<const Store*> stores_;
  std::vector<const Load*> annual_loads_;
  std::vector<const Bus*> buses_;
};

/// Compiles a network into an LP. Throws InputError when validation fails.
LpProblem assemble(const Network& network, std::vector<std::string>* warnings = nullptr);

/// Column/row names used by lpform, shared with result extraction.
namespace lpnames {
std::string capacity(const std::string& component);
std::string dispatch(const std::string& component, std::size_t t);
std::string level(const std::string& store, std::size_t t);
std::string delivery(const std::string& load, std::size_t t);
std::string balance(const std::string& bus, std::size_t t);
std::string annual_demand(const std::string& load);
}  // namespace lpnames

}  // namespace hubopt
