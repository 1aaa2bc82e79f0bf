#pragma once

#include <map>
#include <string>
#include <vector>

#include "hubopt/lpform.hpp"

namespace hubopt {

enum class SolveStatus { Optimal, Infeasible, Unbounded, Error };

std::string to_string(SolveStatus status);

/// Primal and dual solution of an LpProblem.
///
/// Row duals follow the sensitivity convention: dual_i = d(objective)/d(rhs_i), so binding
/// >= rows carry non-negative duals and binding <= rows non-positive ones. Reduced costs
/// are c_j - sum_i dual_i a_ij.
struct LpSolution {
  SolveStatus status = SolveStatus::Error;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double wall_seconds = 0.0;
  long iterations = 0;
  std::string solver;
  std::string message;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct Tolerances {
  double feasibility = 1e-6;  ///< absolute, plus the same factor relative to |rhs|
  double optimality = 1e-6;   ///< relative duality gap and dual sign checks
};

struct ReferenceOptions {
  long max_iterations = 0;           ///< 0 selects a limit from the problem size
  std::size_t column_limit = 50000;  ///< larger problems are refused
  int refactor_interval = 100;
};

/// Bounded-variable revised primal simplex for test-scale problems.
/// Dantzig pricing, falling back to Bland's rule while pivots stay degenerate.
LpSolution solve_reference(const LpProblem& problem, const ReferenceOptions& options = {});

/// CPLEX-LP rendering of a problem together with the names actually written.
struct LpText {
  std::string text;
  std::vector<std::string> column_names;
  std::vector<std::string> row_names;
  /// Tab-separated `kind index original written` lines for every renamed entity.
  std::string mapping;
  std::size_t renamed = 0;
};

/// True when `name` can be written verbatim in CPLEX-LP syntax.
bool is_legal_lp_name(const std::string& name);

LpText write_lp_text(const LpProblem& problem);

/// Shortest decimal that round-trips to the same double; "inf"/"-inf" for infinities.
std::string format_number(double value);

/// External solver invoked as `<command> <model.lp> <solution.sol>`, writing the HiGHS
/// raw solution format. The HUBOPT_LP_BACKEND environment variable overrides `command`.
struct BackendConfig {
  std::string command;
  std::string work_root;  ///< temp directory root; system default when empty
  bool keep_files = false;
  Tolerances tolerances;
};

/// Default backend command: the bundled HiGHS wrapper script.
std::string default_backend_command();

LpSolution solve_external(const LpProblem& problem, const BackendConfig& config = {});

/// Parses a HiGHS raw solution document against the names used when writing the model.
LpSolution parse_highs_solution(const std::string& text, const LpProblem& problem, const LpText& names);

/// Worst violation of each optimality condition, overall and per row kind.
struct KktReport {
  double primal_residual = 0.0;
  double bound_residual = 0.0;
  double dual_sign = 0.0;
  double stationarity = 0.0;
  double complementary_slackness = 0.0;
  double duality_gap = 0.0;  ///< relative
  double dual_objective = 0.0;
  std::map<std::string, double> worst_by_row_kind;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  std::string summary() const;
};

KktReport check_kkt(const LpProblem& problem, const LpSolution& solution, const Tolerances& tolerances = {});

/// Largest scaled violation of row senses and column bounds; used to vet external solutions.
double max_primal_violation(const LpProblem& problem, const std::vector<double>& primal, double relative_scale = 1.0);

}  // namespace hubopt
