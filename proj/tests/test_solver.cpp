#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <random>

#include "hubopt/lpform.hpp"
#include "hubopt/solver.hpp"
#include "toys.hpp"

using namespace hubopt;

namespace {

LpProblem smallest_lp() {
  LpProblem p;
  p.add_column({"x", 0.0, kInf, 2.0, {}});
  const auto r = p.add_row({"c0", Sense::GreaterEqual, 1.0, {}});
  p.add_entry(r, 0, 1.0);
  return p;
}

/// Random LP that is feasible by construction (rows built around a known point)
/// and bounded (finite column bounds).
LpProblem random_lp(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 2 + rng() % 7;
  const std::size_t m = 1 + rng() % 7;
  LpProblem p;
  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = (rng() % 4 == 0) ? -5.0 : 0.0;
    const double hi = (rng() % 3 == 0) ? lo : lo + 1.0 + 9.0 * std::abs(u(rng));
    x0[j] = lo + (hi - lo) * std::abs(u(rng));
    p.add_column({"x" + std::to_string(j), lo, hi, std::round(10 * u(rng)), {}});
  }
  for (std::size_t i = 0; i < m; ++i) {
    double act = 0.0;
    const auto r = p.add_row({"r" + std::to_string(i), Sense::Equal, 0.0, {}});
    for (std::size_t j = 0; j < n; ++j) {
      if (rng() % 2) continue;
      const double a = std::round(4 * u(rng));
      p.add_entry(r, j, a);
      act += a * x0[j];
    }
    const int kind = static_cast<int>(rng() % 3);
    auto& row = p.mutable_rows()[r];
    row.sense = kind == 0 ? Sense::Equal : (kind == 1 ? Sense::LessEqual : Sense::GreaterEqual);
    row.rhs = kind == 0 ? act : (kind == 1 ? act + std::abs(u(rng)) : act - std::abs(u(rng)));
  }
  return p;
}

bool backend_available() {
  static const bool ok = std::system("python3 -c 'import highspy' > /dev/null 2>&1") == 0;
  return ok;
}

}  // namespace

TEST_CASE("smallest LP by hand") {
  const auto sol = solve_reference(smallest_lp());
  REQUIRE(sol.optimal());
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(2.0));
  CHECK(sol.duals[0] == doctest::Approx(2.0));
  CHECK(check_kkt(smallest_lp(), sol).passed());
}

TEST_CASE("LP text of the smallest LP") {
  const LpText lp = write_lp_text(smallest_lp());
  CHECK(lp.text == "Minimize\n obj: 2 x\nSubject To\n c0: x >= 1\nBounds\n x >= 0\nEnd\n");
  CHECK(lp.renamed == 0);
}

TEST_CASE("number formatting is shortest round trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_number(-2.5e-12) == "-2.5e-12");
  CHECK(format_number(kInf) == "inf");
  CHECK(std::stod(format_number(0.622 * 8760.0 / 3.0)) == 0.622 * 8760.0 / 3.0);
}

TEST_CASE("illegal names are renamed with a mapping table") {
  CHECK(is_legal_lp_name("p.electrolysis.12"));
  CHECK_FALSE(is_legal_lp_name("1abc"));
  CHECK_FALSE(is_legal_lp_name(".x"));
  CHECK_FALSE(is_legal_lp_name("e12"));
  CHECK_FALSE(is_legal_lp_name("a b"));
  CHECK_FALSE(is_legal_lp_name("a-b"));
  CHECK_FALSE(is_legal_lp_name("free"));
  LpProblem p;
  p.add_column({"flow[0]", 0.0, kInf, 1.0, {}});
  const auto r = p.add_row({"bal:el", Sense::Equal, 1.0, {}});
  p.add_entry(r, 0, 1.0);
  const LpText lp = write_lp_text(p);
  CHECK(lp.renamed == 2);
  CHECK(lp.column_names[0] == "_c0");
  CHECK(lp.row_names[0] == "_r0");
  CHECK(lp.mapping == "column\t0\tflow[0]\t_c0\nrow\t0\tbal:el\t_r0\n");
}

TEST_CASE("LP text is byte-identical across rebuilds") {
  const auto a = write_lp_text(assemble(toys::electrolysis_toy(4))).text;
  const auto b = write_lp_text(assemble(toys::electrolysis_toy(4))).text;
  CHECK(a == b);
  CHECK(a.find("Bounds\n") != std::string::npos);
}

TEST_CASE("infeasible and unbounded problems") {
  LpProblem inf;
  inf.add_column({"x", 0.0, kInf, 1.0, {}});
  const auto r0 = inf.add_row({"lo", Sense::GreaterEqual, 2.0, {}});
  const auto r1 = inf.add_row({"hi", Sense::LessEqual, 1.0, {}});
  inf.add_entry(r0, 0, 1.0);
  inf.add_entry(r1, 0, 1.0);
  CHECK(solve_reference(inf).status == SolveStatus::Infeasible);

  LpProblem unb;
  unb.add_column({"x", 0.0, kInf, -1.0, {}});
  const auto r = unb.add_row({"c", Sense::GreaterEqual, 0.0, {}});
  unb.add_entry(r, 0, 1.0);
  CHECK(solve_reference(unb).status == SolveStatus::Unbounded);

  if (backend_available()) {
    CHECK(solve_external(inf).status == SolveStatus::Infeasible);
    CHECK(solve_external(unb).status == SolveStatus::Unbounded);
  }
}

TEST_CASE("degenerate ties resolve to the same vertex every time") {
  // min x + y s.t. x + y >= 1: every point on the segment is optimal.
  LpProblem p;
  p.add_column({"x", 0.0, kInf, 1.0, {}});
  p.add_column({"y", 0.0, kInf, 1.0, {}});
  const auto r = p.add_row({"c", Sense::GreaterEqual, 1.0, {}});
  p.add_entry(r, 0, 1.0);
  p.add_entry(r, 1, 1.0);
  const auto a = solve_reference(p);
  const auto b = solve_reference(p);
  REQUIRE(a.optimal());
  CHECK(a.primal == b.primal);
  CHECK(a.objective == doctest::Approx(1.0));
}

TEST_CASE("limits produce an error status") {
  ReferenceOptions few;
  few.column_limit = 1;
  LpProblem p;
  p.add_column({"x", 0.0, 1.0, 1.0, {}});
  p.add_column({"y", 0.0, 1.0, 1.0, {}});
  CHECK(solve_reference(p, few).status == SolveStatus::Error);
  std::mt19937 rng(3);
  ReferenceOptions one;
  one.max_iterations = 1;
  int errors = 0;
  for (int k = 0; k < 20; ++k) errors += solve_reference(random_lp(rng), one).status == SolveStatus::Error;
  CHECK(errors > 0);
}

TEST_CASE("random LPs: optimal, KKT-consistent, agree with the external backend") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const LpProblem p = random_lp(rng);
    const auto sol = solve_reference(p);
    INFO("trial " << trial);
    REQUIRE(sol.optimal());
    const auto rep = check_kkt(p, sol);
    INFO(rep.summary());
    CHECK(rep.passed());
    if (backend_available() && trial % 10 == 0) {
      const auto ext = solve_external(p);
      REQUIRE(ext.optimal());
      CHECK(ext.objective == doctest::Approx(sol.objective).epsilon(1e-8).scale(1.0));
      CHECK(check_kkt(p, ext).passed());
    }
  }
}

TEST_CASE("perturbed dual is flagged by the complementary slackness check") {
  LpProblem p = smallest_lp();
  const auto r = p.add_row({"slack", Sense::LessEqual, 10.0, {}});
  p.add_entry(r, 0, 1.0);
  auto sol = solve_reference(p);
  REQUIRE(check_kkt(p, sol).passed());
  sol.duals[1] = -0.5;
  sol.reduced_costs.clear();
  const auto rep = check_kkt(p, sol);
  CHECK_FALSE(rep.passed());
  CHECK(rep.complementary_slackness > 1e-3);
}

TEST_CASE("toy network through both solvers") {
  const LpProblem p = assemble(toys::electrolysis_toy(6));
  const auto ref = solve_reference(p);
  REQUIRE(ref.optimal());
  CHECK(check_kkt(p, ref).passed());
  if (!backend_available()) return;
  const auto ext = solve_external(p);
  REQUIRE(ext.optimal());
  CHECK(ext.objective == doctest::Approx(ref.objective).epsilon(1e-8));
}

TEST_CASE("backend failures keep the files and report an error") {
  BackendConfig cfg;
  cfg.command = "false";
  const char* env = std::getenv("HUBOPT_LP_BACKEND");
  if (env != nullptr && *env != '\0') return;
  const auto sol = solve_external(smallest_lp(), cfg);
  CHECK(sol.status == SolveStatus::Error);
  CHECK(sol.message.find("files kept") != std::string::npos);
}

TEST_CASE("solution parser rejects truncated files") {
  const LpProblem p = smallest_lp();
  const LpText names = write_lp_text(p);
  CHECK_THROWS_AS(parse_highs_solution("Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 2\n"
                                       "# Columns 1\n",
                                       p, names),
                  InputError);
  const auto sol = parse_highs_solution(
      "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 2\n# Columns 1\nx 1\n# Rows 1\nc0 1\n\n"
      "# Dual solution values\nFeasible\n# Columns 1\nx 0\n# Rows 1\nc0 2\n",
      p, names);
  CHECK(sol.optimal());
  CHECK(sol.duals[0] == 2.0);
}
