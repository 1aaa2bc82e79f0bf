#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "hubopt/solver.hpp"

namespace hubopt {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kSingularTol = 1e-11;
constexpr int kDegenerateSwitch = 30;

/// Column-compressed copy of the constraint matrix with duplicate entries summed.
struct SparseColumns {
  std::vector<std::size_t> start;
  std::vector<std::size_t> index;
  std::vector<double> value;

  static SparseColumns from(const LpProblem& p) {
    std::vector<std::map<std::size_t, double>> cols(p.num_columns());
    for (const auto& e : p.entries()) cols[e.col][e.row] += e.value;
    SparseColumns out;
    out.start.push_back(0);
    for (const auto& col : cols) {
      for (const auto& [row, v] : col) {
        out.index.push_back(row);
        out.value.push_back(v);
      }
      out.start.push_back(out.index.size());
    }
    return out;
  }
};

/// Variables 0..n-1 are structural, n..n+m-1 the logicals r_i = a_i x.
class Simplex {
 public:
  Simplex(const LpProblem& problem, const ReferenceOptions& options)
      : problem_(problem), options_(options), m_(problem.num_rows()), n_(problem.num_columns()),
        a_(SparseColumns::from(problem)) {
    const std::size_t total = n_ + m_;
    lb_.resize(total);
    ub_.resize(total);
    cost_.assign(total, 0.0);
    x_.assign(total, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const auto& c = problem.columns()[j];
      lb_[j] = c.lower;
      ub_[j] = c.upper;
      cost_[j] = c.cost;
      x_[j] = std::isfinite(c.lower) ? c.lower : (std::isfinite(c.upper) ? c.upper : 0.0);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& r = problem.rows()[i];
      lb_[n_ + i] = r.sense == Sense::LessEqual ? -kInf : r.rhs;
      ub_[n_ + i] = r.sense == Sense::GreaterEqual ? kInf : r.rhs;
    }
    head_.resize(m_);
    position_.assign(total, -1);
    for (std::size_t i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      position_[n_ + i] = static_cast<std::ptrdiff_t>(i);
    }
    max_iterations_ = options.max_iterations > 0 ? options.max_iterations
                                                 : 20000 + 20 * static_cast<long>(total);
  }

  LpSolution run() {
    LpSolution sol;
    sol.solver = "reference";
    if (n_ > options_.column_limit) {
      sol.status = SolveStatus::Error;
      sol.message = fmt::format("{} columns exceed the reference solver limit of {}; use an external backend", n_,
                                options_.column_limit);
      return sol;
    }
    refactor();
    int verifications = 0;
    int degenerate = 0;
    int since_refactor = 0;
    for (long iter = 0;; ++iter) {
      if (iter >= max_iterations_) {
        sol.status = SolveStatus::Error;
        sol.message = fmt::format("iteration limit {} reached", max_iterations_);
        sol.iterations = iter;
        return sol;
      }
      if (since_refactor >= options_.refactor_interval) {
        refactor();
        since_refactor = 0;
      }
      const bool phase1 = basic_infeasibility() > kPrimalTol;
      compute_duals(phase1);
      const bool bland = degenerate > kDegenerateSwitch;
      const auto [entering, direction] = price(phase1, bland);
      if (entering < 0) {
        if (phase1) {
          refactor();
          since_refactor = 0;
          if (basic_infeasibility() > kPrimalTol) {
            sol.status = SolveStatus::Infeasible;
            sol.message = fmt::format("sum of infeasibilities {:.3g} cannot be reduced", basic_infeasibility());
            sol.iterations = iter;
            return sol;
          }
          continue;
        }
        // Confirm optimality on a fresh factorization before reporting.
        if (since_refactor > 0 && verifications < 3) {
          ++verifications;
          refactor();
          since_refactor = 0;
          continue;
        }
        sol.iterations = iter;
        finish(sol);
        return sol;
      }
      const auto q = static_cast<std::size_t>(entering);
      column_ftran(q, alpha_);
      const Ratio ratio = ratio_test(q, direction, phase1, bland);
      if (ratio.step == kInf) {
        if (phase1) {
          sol.status = SolveStatus::Error;
          sol.message = "phase 1 ratio test found no blocking variable";
          sol.iterations = iter;
          return sol;
        }
        sol.status = SolveStatus::Unbounded;
        sol.message = fmt::format("column '{}' improves the objective without limit", name_of(q));
        sol.iterations = iter;
        return sol;
      }
      degenerate = ratio.step <= 1e-12 ? degenerate + 1 : 0;
      apply_step(q, direction, ratio);
      if (ratio.leaving >= 0) {
        pivot(q, static_cast<std::size_t>(ratio.leaving));
        ++since_refactor;
      }
    }
  }

 private:
  struct Ratio {
    double step = kInf;
    std::ptrdiff_t leaving = -1;  ///< basis position, -1 for a bound flip
    double leave_value = 0.0;
  };

  std::string name_of(std::size_t var) const {
    return var < n_ ? problem_.columns()[var].name : problem_.rows()[var - n_].name;
  }

  double basic_infeasibility() const {
    double sum = 0.0;
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t v = head_[p];
      if (x_[v] < lb_[v] - kPrimalTol) sum += lb_[v] - x_[v];
      if (x_[v] > ub_[v] + kPrimalTol) sum += x_[v] - ub_[v];
    }
    return sum;
  }

  double phase_cost(std::size_t var, bool phase1) const {
    if (!phase1) return cost_[var];
    if (position_[var] < 0) return 0.0;
    if (x_[var] < lb_[var] - kPrimalTol) return -1.0;
    if (x_[var] > ub_[var] + kPrimalTol) return 1.0;
    return 0.0;
  }

  void compute_duals(bool phase1) {
    y_.assign(m_, 0.0);
    for (std::size_t p = 0; p < m_; ++p) {
      const double cb = phase_cost(head_[p], phase1);
      if (cb == 0.0) continue;
      const double* row = &binv_[p * m_];
      for (std::size_t i = 0; i < m_; ++i) y_[i] += cb * row[i];
    }
  }

  double reduced_cost(std::size_t var, bool phase1) const {
    const double c = phase1 ? 0.0 : cost_[var];
    if (var >= n_) return c + y_[var - n_];
    double d = c;
    for (std::size_t k = a_.start[var]; k < a_.start[var + 1]; ++k) d -= y_[a_.index[k]] * a_.value[k];
    return d;
  }

  std::pair<std::ptrdiff_t, int> price(bool phase1, bool bland) const {
    std::ptrdiff_t best = -1;
    int best_dir = 0;
    double best_score = 0.0;
    for (std::size_t v = 0; v < n_ + m_; ++v) {
      if (position_[v] >= 0 || lb_[v] == ub_[v]) continue;
      const double d = reduced_cost(v, phase1);
      const double tol = kDualTol * (1.0 + (phase1 ? 0.0 : std::abs(cost_[v])));
      int dir = 0;
      if (d < -tol && x_[v] < ub_[v]) dir = 1;
      else if (d > tol && x_[v] > lb_[v]) dir = -1;
      if (dir == 0) continue;
      if (bland) return {static_cast<std::ptrdiff_t>(v), dir};
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = static_cast<std::ptrdiff_t>(v);
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  void column_ftran(std::size_t var, std::vector<double>& out) const {
    out.assign(m_, 0.0);
    if (var >= n_) {
      const std::size_t i = var - n_;
      for (std::size_t p = 0; p < m_; ++p) out[p] = -binv_[p * m_ + i];
      return;
    }
    for (std::size_t k = a_.start[var]; k < a_.start[var + 1]; ++k) {
      const std::size_t i = a_.index[k];
      const double v = a_.value[k];
      for (std::size_t p = 0; p < m_; ++p) out[p] += binv_[p * m_ + i] * v;
    }
  }

  Ratio ratio_test(std::size_t q, int direction, bool phase1, bool bland) const {
    Ratio best;
    if (std::isfinite(lb_[q]) && std::isfinite(ub_[q])) best.step = ub_[q] - lb_[q];
    double best_alpha = 0.0;
    std::size_t best_var = 0;
    for (std::size_t p = 0; p < m_; ++p) {
      const double a = alpha_[p];
      if (std::abs(a) <= kPivotTol) continue;
      const double rate = -direction * a;  // change of x_B[p] per unit step
      const std::size_t v = head_[p];
      double target;
      if (rate > 0) {
        if (phase1 && x_[v] < lb_[v] - kPrimalTol) target = lb_[v];
        else if (phase1 && x_[v] > ub_[v] + kPrimalTol) continue;
        else target = ub_[v];
      } else {
        if (phase1 && x_[v] > ub_[v] + kPrimalTol) target = ub_[v];
        else if (phase1 && x_[v] < lb_[v] - kPrimalTol) continue;
        else target = lb_[v];
      }
      if (!std::isfinite(target)) continue;
      const double step = std::max(0.0, (target - x_[v]) / rate);
      bool take;
      if (best.leaving < 0) {
        take = step < best.step;
      } else if (step < best.step - 1e-12 * (1.0 + best.step)) {
        take = true;
      } else if (step <= best.step + 1e-12 * (1.0 + best.step)) {
        take = bland ? v < best_var : std::abs(a) > best_alpha;
      } else {
        take = false;
      }
      if (take) {
        best.step = step;
        best.leaving = static_cast<std::ptrdiff_t>(p);
        best.leave_value = target;
        best_alpha = std::abs(a);
        best_var = v;
      }
    }
    return best;
  }

  void apply_step(std::size_t q, int direction, const Ratio& ratio) {
    const double theta = ratio.step;
    if (theta != 0.0) {
      for (std::size_t p = 0; p < m_; ++p)
        if (alpha_[p] != 0.0) x_[head_[p]] -= direction * alpha_[p] * theta;
    }
    if (ratio.leaving < 0) {
      x_[q] = direction > 0 ? ub_[q] : lb_[q];
      return;
    }
    x_[q] += direction * theta;
    x_[head_[static_cast<std::size_t>(ratio.leaving)]] = ratio.leave_value;
  }

  void pivot(std::size_t q, std::size_t r) {
    const std::size_t leaving = head_[r];
    position_[leaving] = -1;
    head_[r] = q;
    position_[q] = static_cast<std::ptrdiff_t>(r);
    double* prow = &binv_[r * m_];
    const double inv = 1.0 / alpha_[r];
    for (std::size_t i = 0; i < m_; ++i) prow[i] *= inv;
    for (std::size_t p = 0; p < m_; ++p) {
      if (p == r || alpha_[p] == 0.0) continue;
      const double f = alpha_[p];
      double* row = &binv_[p * m_];
      for (std::size_t i = 0; i < m_; ++i) row[i] -= f * prow[i];
    }
  }

  /// Rebuilds B^-1 exploiting that basic logicals form a negated identity block, then
  /// recomputes basic values. Structurals found dependent are swapped for logicals.
  void refactor() {
    for (int attempt = 0; attempt < 3; ++attempt)
      if (try_refactor()) break;
    recompute_basic_values();
  }

  bool try_refactor() {
    std::vector<std::size_t> structural_pos;
    std::vector<char> row_covered(m_, 0);
    for (std::size_t p = 0; p < m_; ++p) {
      if (head_[p] < n_) structural_pos.push_back(p);
      else row_covered[head_[p] - n_] = 1;
    }
    std::vector<std::size_t> rows_s;
    std::vector<std::ptrdiff_t> local_row(m_, -1);
    for (std::size_t i = 0; i < m_; ++i)
      if (!row_covered[i]) {
        local_row[i] = static_cast<std::ptrdiff_t>(rows_s.size());
        rows_s.push_back(i);
      }
    const std::size_t k = structural_pos.size();
    // P = A[rows_s, S], augmented with identity, Gauss-Jordan with row-usage flags.
    std::vector<double> mat(k * k, 0.0), inv(k * k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t var = head_[structural_pos[c]];
      for (std::size_t e = a_.start[var]; e < a_.start[var + 1]; ++e) {
        const std::ptrdiff_t lr = local_row[a_.index[e]];
        if (lr >= 0) mat[static_cast<std::size_t>(lr) * k + c] = a_.value[e];
      }
    }
    for (std::size_t i = 0; i < k; ++i) inv[i * k + i] = 1.0;
    std::vector<char> used(k, 0);
    std::vector<std::ptrdiff_t> pivot_row(k, -1);
    std::vector<std::size_t> dependent;
    for (std::size_t c = 0; c < k; ++c) {
      std::ptrdiff_t r = -1;
      double best = kSingularTol;
      for (std::size_t i = 0; i < k; ++i) {
        if (used[i]) continue;
        const double v = std::abs(mat[i * k + c]);
        if (v > best) {
          best = v;
          r = static_cast<std::ptrdiff_t>(i);
        }
      }
      if (r < 0) {
        dependent.push_back(c);
        continue;
      }
      const auto ru = static_cast<std::size_t>(r);
      used[ru] = 1;
      pivot_row[c] = r;
      const double piv = 1.0 / mat[ru * k + c];
      for (std::size_t j = 0; j < k; ++j) {
        mat[ru * k + j] *= piv;
        inv[ru * k + j] *= piv;
      }
      for (std::size_t i = 0; i < k; ++i) {
        if (i == ru) continue;
        const double f = mat[i * k + c];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) {
          mat[i * k + j] -= f * mat[ru * k + j];
          inv[i * k + j] -= f * inv[ru * k + j];
        }
      }
    }
    if (!dependent.empty()) {
      // Replace each dependent structural by the logical of an unpivoted row.
      std::vector<std::size_t> free_rows;
      for (std::size_t i = 0; i < k; ++i)
        if (!used[i]) free_rows.push_back(rows_s[i]);
      for (std::size_t d = 0; d < dependent.size(); ++d) {
        const std::size_t p = structural_pos[dependent[d]];
        const std::size_t var = head_[p];
        position_[var] = -1;
        x_[var] = std::isfinite(lb_[var]) ? lb_[var] : (std::isfinite(ub_[var]) ? ub_[var] : 0.0);
        const std::size_t logical = n_ + free_rows[d];
        head_[p] = logical;
        position_[logical] = static_cast<std::ptrdiff_t>(p);
      }
      return false;
    }
    // Row c of P^-1 is row pivot_row[c] of the transformed identity.
    binv_.assign(m_ * m_, 0.0);
    std::vector<double> pinv(k * k);
    for (std::size_t c = 0; c < k; ++c) {
      const auto src = static_cast<std::size_t>(pivot_row[c]);
      std::copy(&inv[src * k], &inv[src * k] + k, &pinv[c * k]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      double* row = &binv_[structural_pos[c] * m_];
      for (std::size_t j = 0; j < k; ++j) row[rows_s[j]] = pinv[c * k + j];
    }
    for (std::size_t p = 0; p < m_; ++p)
      if (head_[p] >= n_) binv_[p * m_ + (head_[p] - n_)] = -1.0;
    // Rows of basic logicals pick up Q P^-1.
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t var = head_[structural_pos[c]];
      for (std::size_t e = a_.start[var]; e < a_.start[var + 1]; ++e) {
        const std::size_t i = a_.index[e];
        if (!row_covered[i]) continue;
        double* row = &binv_[static_cast<std::size_t>(position_[n_ + i]) * m_];
        for (std::size_t j = 0; j < k; ++j) row[rows_s[j]] += a_.value[e] * pinv[c * k + j];
      }
    }
    return true;
  }

  void recompute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (std::size_t v = 0; v < n_ + m_; ++v) {
      if (position_[v] >= 0 || x_[v] == 0.0) continue;
      if (v >= n_) {
        rhs[v - n_] += x_[v];
      } else {
        for (std::size_t e = a_.start[v]; e < a_.start[v + 1]; ++e) rhs[a_.index[e]] -= a_.value[e] * x_[v];
      }
    }
    for (std::size_t p = 0; p < m_; ++p) {
      const double* row = &binv_[p * m_];
      double s = 0.0;
      for (std::size_t i = 0; i < m_; ++i) s += row[i] * rhs[i];
      x_[head_[p]] = s;
    }
  }

  void finish(LpSolution& sol) {
    compute_duals(false);
    sol.status = SolveStatus::Optimal;
    sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.duals = y_;
    sol.reduced_costs.resize(n_);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      sol.reduced_costs[j] = position_[j] >= 0 ? 0.0 : reduced_cost(j, false);
      sol.objective += cost_[j] * x_[j];
    }
  }

  const LpProblem& problem_;
  ReferenceOptions options_;
  std::size_t m_;
  std::size_t n_;
  SparseColumns a_;
  std::vector<double> lb_, ub_, cost_, x_;
  std::vector<std::size_t> head_;
  std::vector<std::ptrdiff_t> position_;
  std::vector<double> binv_;  ///< row-major, row p belongs to basis position p
  std::vector<double> y_;
  std::vector<double> alpha_;
  long max_iterations_ = 0;
};

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Error: return "error";
  }
  return "error";
}

LpSolution solve_reference(const LpProblem& problem, const ReferenceOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  LpSolution sol = Simplex(problem, options).run();
  sol.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace hubopt
