#include <cmath>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

#include "hubopt/solver.hpp"

#ifndef HUBOPT_BACKEND_SCRIPT
#define HUBOPT_BACKEND_SCRIPT "tools/highs_backend.py"
#endif

namespace hubopt {

namespace fs = std::filesystem;

std::string default_backend_command() { return fmt::format("python3 '{}'", HUBOPT_BACKEND_SCRIPT); }

namespace {

fs::path make_work_dir(const std::string& root) {
  const fs::path base = root.empty() ? fs::temp_directory_path() : fs::path(root);
  fs::create_directories(base);
  std::string templ = (base / "hubopt-XXXXXX").string();
  if (mkdtemp(templ.data()) == nullptr) throw InputError("cannot create solver work directory under " + base.string());
  return fs::path(templ);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

double max_primal_violation(const LpProblem& problem, const std::vector<double>& primal, double relative_scale) {
  std::vector<double> activity(problem.num_rows(), 0.0);
  for (const auto& e : problem.entries()) activity[e.row] += e.value * primal[e.col];
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    const auto& r = problem.rows()[i];
    const double scale = 1.0 + relative_scale * std::abs(r.rhs);
    double v = 0.0;
    if (r.sense != Sense::GreaterEqual) v = std::max(v, activity[i] - r.rhs);
    if (r.sense != Sense::LessEqual) v = std::max(v, r.rhs - activity[i]);
    worst = std::max(worst, v / scale);
  }
  for (std::size_t j = 0; j < problem.num_columns(); ++j) {
    const auto& c = problem.columns()[j];
    if (std::isfinite(c.lower)) worst = std::max(worst, (c.lower - primal[j]) / (1.0 + relative_scale * std::abs(c.lower)));
    if (std::isfinite(c.upper)) worst = std::max(worst, (primal[j] - c.upper) / (1.0 + relative_scale * std::abs(c.upper)));
  }
  return worst;
}

LpSolution solve_external(const LpProblem& problem, const BackendConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  std::string command = config.command.empty() ? default_backend_command() : config.command;
  if (const char* env = std::getenv("HUBOPT_LP_BACKEND"); env != nullptr && *env != '\0') command = env;

  LpSolution sol;
  sol.solver = "external";
  const fs::path dir = make_work_dir(config.work_root);
  const fs::path model = dir / "model.lp";
  const fs::path solution = dir / "solution.sol";
  const fs::path log = dir / "backend.log";
  bool keep = config.keep_files;
  try {
    const LpText lp = write_lp_text(problem);
    {
      std::ofstream out(model, std::ios::binary);
      out << lp.text;
      if (!out) throw InputError("cannot write " + model.string());
    }
    if (lp.renamed > 0) {
      std::ofstream names(dir / "model.lp.names", std::ios::binary);
      names << lp.mapping;
    }
    const std::string cmd = fmt::format("{} '{}' '{}' > '{}' 2>&1", command, model.string(), solution.string(),
                                        log.string());
    const int rc = std::system(cmd.c_str());
    if (rc != 0 || !fs::exists(solution)) {
      keep = true;
      sol.status = SolveStatus::Error;
      sol.message = fmt::format("backend exited with status {}; files kept in {}", rc, dir.string());
    } else {
      sol = parse_highs_solution(read_file(solution), problem, lp);
      if (sol.optimal()) {
        const double violation = max_primal_violation(problem, sol.primal, 1.0);
        if (violation > config.tolerances.feasibility) {
          keep = true;
          sol.status = SolveStatus::Error;
          sol.message = fmt::format("backend solution rejected: primal residual {:.3g} exceeds {:.3g}; files kept in {}",
                                    violation, config.tolerances.feasibility, dir.string());
        } else {
          double obj = 0.0;
          for (std::size_t j = 0; j < problem.num_columns(); ++j) obj += problem.columns()[j].cost * sol.primal[j];
          sol.objective = obj;
        }
      }
    }
  } catch (const std::exception& ex) {
    keep = true;
    sol = LpSolution{};
    sol.status = SolveStatus::Error;
    sol.message = fmt::format("{}; files kept in {}", ex.what(), dir.string());
  }
  sol.solver = "external";
  if (!keep) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  sol.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace hubopt
