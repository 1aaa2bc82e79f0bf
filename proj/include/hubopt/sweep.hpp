#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hubopt/catalog.hpp"
#include "hubopt/results.hpp"
#include "hubopt/solver.hpp"

namespace hubopt {

/// Value lists of the sensitivity parameters; the default is the full grid.
struct GridSpec {
  std::vector<ScenarioKind> scenarios{ScenarioKind::H2ToGrid, ScenarioKind::MeOHStandalone};
  std::vector<double> co2_tax{0.0, 150.0, 250.0};
  std::vector<double> co2_recovery_ratio{0.80, 0.85, 0.90, 0.95, 0.99};
  std::vector<double> max_re{0.1, 0.5, 1.0};
  std::vector<int> price_year{2019, 2022};
  std::vector<bool> dh_enabled{false, true};
  std::vector<bool> biochar_enabled{false, true};

  std::size_t size() const;
};

/// Both scenarios and years at the reference value of every other parameter.
GridSpec reference_slice();

nlohmann::json to_json(const GridSpec& grid);
/// Keys absent from the document keep the full-grid lists. Unknown keys are rejected.
GridSpec grid_from_json(const nlohmann::json& doc);

/// Cartesian product in a fixed order (scenario outermost, biochar innermost).
/// Throws InputError when any list is empty.
std::vector<ScenarioConfig> enumerate_cases(const ScenarioConfig& base, const GridSpec& grid);

/// Readable, unique case label, e.g. "H2_to_grid-2019-tax150-rec0.90-re0.5-dh0-bc0".
std::string case_label(const ScenarioConfig& config);

struct RunOptions {
  std::string solver;  ///< "external" or "reference"; empty uses the case config
  BackendConfig backend;
  ReferenceOptions reference;
  /// Re-solve when a link is built below its minimum size: once forbidden, once at the minimum.
  bool branch_min_build = true;
};

/// build, assemble, solve, post-process. Errors are captured in the result, never thrown.
CaseResult run_case(const ScenarioConfig& config, const Catalog& catalog, const MarketSeries& market,
                    const RunOptions& options = {});
/// Loads the market for the case first; a missing or corrupt data path yields an error result.
CaseResult run_case(const ScenarioConfig& config, const Catalog& catalog, const RunOptions& options = {});

/// Solves an assembled hub LP, resolving semi-continuous minimum sizes by enumeration.
LpSolution solve_with_min_build(const Network& network, LpProblem& problem, const RunOptions& options,
                                std::vector<std::string>* log = nullptr);

struct SweepSpec {
  ScenarioConfig base;
  GridSpec grid;
  std::string output_dir = "results";
  int jobs = 1;
  RunOptions run;
};

nlohmann::json to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& doc);
/// Relative paths inside the spec resolve against the spec file's directory.
SweepSpec load_sweep_spec(const std::string& path);

/// Files in each case directory besides the result tables.
namespace SweepFiles {
inline constexpr const char* config = "config.json";
inline constexpr const char* fingerprint = "lp_fingerprint.txt";
inline constexpr const char* cases = "cases";
inline constexpr const char* index = "sweep_index.csv";
}  // namespace SweepFiles

/// `<output>/cases/<label>-<config hash>`.
std::string case_directory(const std::string& output_dir, const ScenarioConfig& config);

struct SweepCase {
  std::size_t index = 0;
  ScenarioConfig config;
  std::string directory;
  bool resumed = false;
  CaseResult result;
};

struct SweepSummary {
  std::vector<SweepCase> cases;  ///< enumeration order regardless of completion order
  std::size_t completed = 0;
  std::size_t resumed = 0;
  std::size_t failed = 0;
};

using ProgressFn = std::function<void(const SweepCase&, std::size_t done, std::size_t total)>;

/// Runs every case, skipping directories that already hold a result for the same config hash.
SweepSummary run_sweep(const SweepSpec& spec, const Catalog& catalog, const ProgressFn& progress = {});

/// Completed case results found under a sweep output directory, sorted by directory name.
std::vector<CaseResult> load_sweep_results(const std::string& output_dir);

struct AggregateFilter {
  std::optional<ScenarioKind> scenario;
  std::optional<int> price_year;
};

struct AggregateTables {
  std::string long_csv;         ///< case,label,scenario,...,metric,value
  std::string correlation_csv;  ///< group,metric_a,metric_b,pearson,n
  std::string recovery_csv;     ///< one row per case: parameters with LCOH and LCOM
  std::size_t rows = 0;         ///< data rows in long_csv
  std::size_t cases = 0;
};

/// Pearson correlation; NaN when either series is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

AggregateTables aggregate(const std::vector<CaseResult>& results, const AggregateFilter& filter = {});

/// Gnuplot script plotting LCOM against the recovery ratio from recovery_csv.
std::string recovery_gnuplot(const std::string& csv_name);

}  // namespace hubopt
