#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "ipfasst/analysis.hpp"
#include "ipfasst/error.hpp"
#include "ipfasst/sdc.hpp"

using namespace ipfasst;

namespace {

HeatProblem heat_problem(int n, SolvePolicy policy, int order = 2) {
  return HeatProblem(HeatOperator(Grid(1, n), 1.0, order), MgConfig{{SmootherKind::GaussSeidelLex, 1.0}, 2, 2, 4},
                     policy);
}

double state_diff(const NodeStates& a, const NodeStates& b) {
  double d = 0;
  for (int m = 0; m < a.size(); ++m) d = std::max(d, max_abs_diff(a.y[static_cast<std::size_t>(m)], b.y[static_cast<std::size_t>(m)]));
  return d;
}

void check_coherent(const NodeStates& s, const ImplicitProblem& p) {
  for (std::size_t m = 0; m < s.y.size(); ++m) {
    Vector f(s.y[m].size());
    p.apply(s.y[m], f);
    CHECK(max_abs_diff(f, s.f[m]) == 0.0);
  }
}

}  // namespace

TEST_CASE("collocation with M=1 is backward Euler") {
  auto p = heat_problem(16, SolvePolicy::to_tolerance(1e-14));
  auto u0 = initial_condition(p.grid(), 1);
  const double dt = 0.1;
  auto col = collocation_solve(p, build_q(1), u0.values, dt);
  Vector be = u0.values;
  p.solve_shifted(dt, u0.values, be);
  CHECK(max_abs_diff(col.y[1], be) <= 1e-12);
  CHECK(max_abs_diff(col.y[0], u0.values) == 0.0);
}

TEST_CASE("scalar collocation, M=2, lambda dt = -1") {
  ScalarProblem p(-1.0);
  auto t = build_q(2);
  Vector y0{1.0};
  auto col = collocation_solve(p, t, y0, 1.0);
  // (I + Q) Y = 1: rows 1,2 of the 2x2 block [[1.75, -0.25], [1, 1]]
  Eigen::Matrix2d a;
  a << 1.75, -0.25, 1.0, 1.0;
  Eigen::Vector2d y = a.lu().solve(Eigen::Vector2d(1.0, 1.0));
  CHECK(col.y[1][0] == doctest::Approx(y(0)).epsilon(1e-14));
  CHECK(col.y[2][0] == doctest::Approx(y(1)).epsilon(1e-14));
  CHECK(col.y[1][0] == doctest::Approx(0.625));
  CHECK(col.y[2][0] == doctest::Approx(0.375));

  auto zero = collocation_solve(p, t, y0, 0.0);
  for (auto& v : zero.y) CHECK(v[0] == 1.0);
  CHECK(residual(zero, y0, 0.0) == 0.0);
}

TEST_CASE("one sweep with M=1 equals backward Euler") {
  ScalarProblem p(-1.0);
  auto t = build_q(1);
  Vector y0{1.0};
  auto s = spread(p, t, y0);
  sdc_sweep(s, y0, nullptr, 1.0, p);
  CHECK(s.y[1][0] == doctest::Approx(0.5));
  check_coherent(s, p);
}

TEST_CASE("collocation solution is a fixed point of exact sweeps") {
  auto p = heat_problem(32, SolvePolicy::to_tolerance(1e-13));
  auto u0 = initial_condition(p.grid(), 1);
  for (int M : {2, 4}) {
    auto col = collocation_solve(p, build_q(M), u0.values, 0.05);
    CHECK(residual(col, u0.values, 0.05) <= 1e-10);
    NodeStates s = col;
    sdc_sweep(s, u0.values, nullptr, 0.05, p);
    CHECK(state_diff(s, col) <= 1e-11);
    check_coherent(s, p);
  }
}

TEST_CASE("sweep error propagation equals the iteration matrix") {
  for (int M : {2, 4})
    for (double z : {-0.1, -1.0, -10.0}) {
      ScalarProblem p(z);
      auto t = build_q(M);
      Vector y0{1.0};
      auto col = collocation_solve(p, t, y0, 1.0);
      std::mt19937 rng(static_cast<unsigned>(M * 100 + 7));
      std::uniform_real_distribution<double> ud(-1, 1);
      auto s = spread(p, t, y0);
      for (int m = 1; m <= M; ++m) s.y[static_cast<std::size_t>(m)][0] = ud(rng);
      refresh(s, p);
      Eigen::VectorXd e0(M + 1);
      for (int m = 0; m <= M; ++m) e0(m) = s.y[static_cast<std::size_t>(m)][0] - col.y[static_cast<std::size_t>(m)][0];
      sdc_sweep(s, y0, nullptr, 1.0, p);
      Eigen::VectorXd e1 = iteration_matrix(t, z) * e0;
      for (int m = 0; m <= M; ++m)
        CHECK(std::abs(s.y[static_cast<std::size_t>(m)][0] - col.y[static_cast<std::size_t>(m)][0] - e1(m)) <= 20 * 2.2e-16 * std::max(1.0, std::abs(z)));
    }
}

TEST_CASE("per-sweep contraction matches the damping factor") {
  ScalarProblem p(-1.0);
  auto t = build_q(2);
  Vector y0{1.0};
  auto col = collocation_solve(p, t, y0, 1.0);
  auto s = spread(p, t, y0);
  const double rho = damping_factor(t, -1.0);
  double prev = state_diff(s, col);
  for (int k = 0; k < 6; ++k) {
    sdc_sweep(s, y0, nullptr, 1.0, p);
    const double e = state_diff(s, col);
    CHECK(e <= prev * rho * (1 + 1e-6) + 1e-15);
    prev = e;
  }
}

TEST_CASE("residual decreases monotonically with exact solves") {
  auto p = heat_problem(64, SolvePolicy::to_tolerance(1e-14));
  auto u0 = initial_condition(p.grid(), 1);
  auto s = spread(p, build_q(4), u0.values);
  double prev = residual(s, u0.values, 0.1);
  for (int k = 0; k < 8; ++k) {
    sdc_sweep(s, u0.values, nullptr, 0.1, p);
    const double r = residual(s, u0.values, 0.1);
    if (prev > 1e-12) CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("run_sdc basics") {
  auto p = heat_problem(16, SolvePolicy::to_tolerance(1e-14));
  auto u0 = initial_condition(p.grid(), 1);
  auto run = run_sdc(p, build_q(1), u0.values, 0.2, 1, 1e-12, 5);
  Vector be = u0.values;
  p.solve_shifted(0.2, u0.values, be);
  CHECK(max_abs_diff(run.final_value, be) <= 1e-12);
  CHECK(run.steps.size() == 1);
  CHECK(run.steps[0].converged);

  auto capped = run_sdc(p, build_q(4), u0.values, 1.0, 2, 1e-300, 3);
  CHECK(capped.steps.size() == 2);
  CHECK_FALSE(capped.steps[0].converged);
  CHECK(capped.steps[0].iterations == 3);
  CHECK_THROWS_AS(run_sdc(p, build_q(2), u0.values, 1.0, 0, 1e-9, 3), Error);
}

TEST_CASE("warm starts reduce V-cycles per sweep") {
  auto p = heat_problem(128, SolvePolicy::to_tolerance(1e-12));
  auto u0 = initial_condition(p.grid(), 1);
  auto run = run_sdc(p, build_q(4), u0.values, 1.0, 16, 1e-10, 30);
  int ok = 0;
  for (const auto& st : run.steps) {
    bool mono = true;
    for (std::size_t k = 1; k < st.vcycles.size(); ++k) mono = mono && st.vcycles[k] <= st.vcycles[k - 1];
    ok += mono;
  }
  CHECK(ok >= static_cast<int>(0.9 * run.steps.size()));
}

TEST_CASE("collocation size limit") {
  auto p = heat_problem(16, SolvePolicy::fixed(1));
  HeatProblem big(HeatOperator(Grid(3, 64), 1.0, 2), MgConfig{}, SolvePolicy::fixed(1));
  Vector y0(big.size(), 0.0);
  CHECK_THROWS_AS(collocation_solve(big, build_q(2), y0, 0.1), Error);
}
