#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hubopt/netcore.hpp"
#include "hubopt/solver.hpp"

namespace hubopt {

/// Quantile levels reported for every bus.
inline constexpr double kQuantileLevels[] = {0.05, 0.25, 0.5, 0.75, 0.95};

/// Nearest-rank quantile of an ascending sample: element ceil(q*n), 1-based.
double nearest_rank(const std::vector<double>& sorted, double q);

/// Hourly shadow prices of a bus (dual of its balance rows). Throws InputError for an unknown bus.
std::vector<double> shadow_prices(const LpProblem& problem, const LpSolution& solution, const std::string& bus);

struct PriceStats {
  std::string bus;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> quantiles;  ///< one per kQuantileLevels entry
};

PriceStats shadow_stats(const LpProblem& problem, const LpSolution& solution, const std::string& bus);

/// Dual of the annual-demand row of each annual load, in € per unit of product.
std::map<std::string, double> levelized_costs(const LpProblem& problem, const LpSolution& solution);
/// Throws InputError when the load has no annual-demand row.
double levelized_cost(const LpProblem& problem, const LpSolution& solution, const std::string& load);

struct GroupCost {
  std::string group;
  double capital = 0.0;   ///< €/y
  double marginal = 0.0;  ///< €/y, negative for net revenue
};

/// Annualized objective split by component group.
struct CostBreakdown {
  std::vector<GroupCost> groups;  ///< sorted by group name
  double capital = 0.0;
  double marginal = 0.0;
  /// Marginal cost of external-trade links and external-group generators (purchases minus sales).
  double external_trade = 0.0;
  double total = 0.0;
  /// Value of annual loads at their levelized cost.
  double ptx_value = 0.0;
  double total_with_ptx_sales = 0.0;
};

/// Throws InputError when a priced component carries no group.
CostBreakdown cost_breakdown(const Network& network, const LpProblem& problem, const LpSolution& solution);

struct BusImbalance {
  std::string bus;
  double max_abs = 0.0;
  int worst_snapshot = -1;
};

/// Strong-duality reconciliation in annual €: the objective equals the value of all loads at
/// their shadow prices plus the rents earned on exogenous limits (fixed capacities, potentials)
/// and on column bounds.
struct DualityAudit {
  double objective = 0.0;
  double load_value = 0.0;
  std::map<std::string, double> load_values;  ///< per load
  double capacity_rents = 0.0;
  double bound_rents = 0.0;
  double external_trade = 0.0;  ///< informational: cash exchanged with external grids
  double residual = 0.0;
  double relative_residual = 0.0;
  std::vector<BusImbalance> imbalances;  ///< every bus, worst first
  std::vector<std::string> findings;

  bool passed() const { return findings.empty(); }
};

DualityAudit duality_audit(const Network& network, const LpProblem& problem, const LpSolution& solution,
                           double tolerance = 1e-6);

struct SolverInfo {
  std::string solver;
  SolveStatus status = SolveStatus::Error;
  double objective = 0.0;  ///< horizon objective as solved
  double wall_seconds = 0.0;
  long iterations = 0;
  std::string message;
  bool kkt_passed = false;
  std::string kkt;
  std::uint64_t lp_fingerprint = 0;
  std::size_t rows = 0;
  std::size_t columns = 0;
};

/// Names of the loads whose duals are reported as LCOH and LCOM.
struct ResultOptions {
  std::string h2_load = "H2_demand";
  std::string meoh_load = "MeOH_demand";
  bool hourly_prices = true;
};

struct CaseResult {
  std::string name;
  nlohmann::json scenario;  ///< configuration echo
  SolverInfo solver;
  std::map<std::string, double> capacities;    ///< every component, built or fixed
  std::map<std::string, std::string> groups;   ///< component group
  std::map<std::string, double> annual_flows;  ///< link reference flow, per year
  std::map<std::string, double> levelized;
  std::optional<double> lcoh;
  std::optional<double> lcom;
  std::vector<PriceStats> prices;
  CostBreakdown breakdown;
  DualityAudit audit;
  std::vector<std::string> timestamps;
  std::map<std::string, std::vector<double>> hourly_prices;
  std::vector<std::string> warnings;
  std::string error;  ///< set when the case failed before or during solving

  bool optimal() const { return solver.status == SolveStatus::Optimal && error.empty(); }
};

/// Post-processes a solved case. For non-optimal solutions only the solver metadata is filled.
CaseResult make_case_result(const Network& network, const LpProblem& problem, const LpSolution& solution,
                            const ResultOptions& options = {});

nlohmann::json to_json(const CaseResult& result);
CaseResult case_result_from_json(const nlohmann::json& doc);

/// Result files written into a case directory.
namespace ResultFiles {
inline constexpr const char* result = "result.json";
inline constexpr const char* capacities = "capacities.csv";
inline constexpr const char* prices = "prices_stats.csv";
inline constexpr const char* breakdown = "breakdown.csv";
inline constexpr const char* duals = "duals_hourly.csv";
}  // namespace ResultFiles

std::string capacities_csv(const CaseResult& result);
std::string prices_csv(const CaseResult& result);
std::string breakdown_csv(const CaseResult& result);
std::string duals_csv(const CaseResult& result);

/// Writes result.json and the four CSV tables. Throws std::runtime_error on I/O failure.
void write_case_result(const std::string& dir, const CaseResult& result);
CaseResult read_case_result(const std::string& dir);

}  // namespace hubopt
