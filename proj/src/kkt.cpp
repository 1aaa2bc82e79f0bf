#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hubopt/solver.hpp"

namespace hubopt {

std::string KktReport::summary() const {
  return fmt::format(
      "primal {:.2e}, bounds {:.2e}, dual sign {:.2e}, stationarity {:.2e}, compl. slackness {:.2e}, gap {:.2e}",
      primal_residual, bound_residual, dual_sign, stationarity, complementary_slackness, duality_gap);
}

KktReport check_kkt(const LpProblem& problem, const LpSolution& solution, const Tolerances& tol) {
  KktReport rep;
  if (!solution.optimal()) {
    rep.failures.push_back("solution status is " + to_string(solution.status));
    return rep;
  }
  const std::size_t m = problem.num_rows();
  const std::size_t n = problem.num_columns();
  if (solution.primal.size() != n || solution.duals.size() != m) {
    rep.failures.emplace_back("solution vectors do not match the problem size");
    return rep;
  }
  const auto& x = solution.primal;
  const auto& y = solution.duals;

  std::vector<double> activity(m, 0.0);
  std::vector<double> d(n, 0.0);
  double cmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = problem.columns()[j].cost;
    cmax = std::max(cmax, std::abs(d[j]));
  }
  for (const auto& e : problem.entries()) {
    activity[e.row] += e.value * x[e.col];
    d[e.col] -= y[e.row] * e.value;
  }
  const double row_dual_scale = 1.0 + cmax;

  auto note = [&](RowKind kind, double v) {
    double& slot = rep.worst_by_row_kind[to_string(kind)];
    slot = std::max(slot, v);
  };

  double dual_obj = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = problem.rows()[i];
    const double pscale = 1.0 + std::abs(r.rhs);
    const double slack = activity[i] - r.rhs;
    double primal = 0.0;
    double sign = 0.0;
    double cs = 0.0;
    if (r.sense == Sense::Equal) {
      primal = std::abs(slack) / pscale;
    } else if (r.sense == Sense::LessEqual) {
      primal = std::max(0.0, slack) / pscale;
      sign = std::max(0.0, y[i]) / row_dual_scale;
      cs = std::min(std::abs(y[i]) / row_dual_scale, std::abs(slack) / pscale);
    } else {
      primal = std::max(0.0, -slack) / pscale;
      sign = std::max(0.0, -y[i]) / row_dual_scale;
      cs = std::min(std::abs(y[i]) / row_dual_scale, std::abs(slack) / pscale);
    }
    rep.primal_residual = std::max(rep.primal_residual, primal);
    rep.dual_sign = std::max(rep.dual_sign, sign);
    rep.complementary_slackness = std::max(rep.complementary_slackness, cs);
    note(r.tag.kind, std::max({primal, sign, cs}));
    dual_obj += y[i] * r.rhs;
  }

  const bool have_reduced = solution.reduced_costs.size() == n;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& c = problem.columns()[j];
    const double dscale = 1.0 + std::abs(c.cost);
    if (have_reduced)
      rep.stationarity = std::max(rep.stationarity, std::abs(d[j] - solution.reduced_costs[j]) / dscale);
    double bound = 0.0;
    if (std::isfinite(c.lower)) bound = std::max(bound, (c.lower - x[j]) / (1.0 + std::abs(c.lower)));
    if (std::isfinite(c.upper)) bound = std::max(bound, (x[j] - c.upper) / (1.0 + std::abs(c.upper)));
    rep.bound_residual = std::max(rep.bound_residual, bound);
    if (d[j] > 0.0) {
      if (std::isfinite(c.lower)) {
        rep.complementary_slackness = std::max(
            rep.complementary_slackness, std::min(d[j] / dscale, std::abs(x[j] - c.lower) / (1.0 + std::abs(c.lower))));
        dual_obj += d[j] * c.lower;
      } else {
        rep.dual_sign = std::max(rep.dual_sign, d[j] / dscale);
      }
    } else if (d[j] < 0.0) {
      if (std::isfinite(c.upper)) {
        rep.complementary_slackness = std::max(
            rep.complementary_slackness, std::min(-d[j] / dscale, std::abs(c.upper - x[j]) / (1.0 + std::abs(c.upper))));
        dual_obj += d[j] * c.upper;
      } else {
        rep.dual_sign = std::max(rep.dual_sign, -d[j] / dscale);
      }
    }
  }
  double primal_obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) primal_obj += problem.columns()[j].cost * x[j];
  rep.dual_objective = dual_obj;
  rep.duality_gap = std::abs(primal_obj - dual_obj) / (1.0 + std::abs(primal_obj));

  auto check = [&](double value, double limit, const char* what) {
    if (value > limit) rep.failures.push_back(fmt::format("{} {:.3e} exceeds {:.1e}", what, value, limit));
  };
  check(rep.primal_residual, tol.feasibility, "primal residual");
  check(rep.bound_residual, tol.feasibility, "bound residual");
  check(rep.dual_sign, tol.optimality, "dual sign violation");
  check(rep.stationarity, tol.optimality, "stationarity residual");
  check(rep.complementary_slackness, tol.optimality, "complementary slackness violation");
  check(rep.duality_gap, tol.optimality, "duality gap");
  return rep;
}

}  // namespace hubopt
