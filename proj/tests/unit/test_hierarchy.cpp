#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ipfasst/error.hpp"
#include "ipfasst/hierarchy.hpp"

using namespace ipfasst;

namespace {

LevelSpec level(int n, int m, SolvePolicy policy = SolvePolicy::to_tolerance(1e-13), int order = 2) {
  LevelSpec s;
  s.points = n;
  s.substeps = m;
  s.stencil_order = order;
  s.mg = {{SmootherKind::GaussSeidelLex, 1.0}, 2, 2, 4};
  s.policy = policy;
  return s;
}

Eigen::MatrixXd dense(const HeatOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.grid().size());
  Eigen::MatrixXd a(n, n);
  Vector e(op.grid().size(), 0.0), out(op.grid().size());
  for (Eigen::Index j = 0; j < n; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    op.apply(e, out);
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = out[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(j)] = 0.0;
  }
  return a;
}

// Dense (I - dt Q kron A) Y = [y0..y0] + tau, solved with a full LU.
Eigen::MatrixXd dense_collocation(const Eigen::MatrixXd& a, const Matrix& q, const Eigen::VectorXd& y0,
                                  double dt, const NodeCorrection* tau = nullptr) {
  const Eigen::Index n = a.rows(), nodes = q.rows();
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n * nodes, n * nodes);
  Eigen::VectorXd rhs(n * nodes);
  for (Eigen::Index m = 0; m < nodes; ++m) {
    for (Eigen::Index j = 0; j < nodes; ++j) sys.block(m * n, j * n, n, n) -= dt * q(m, j) * a;
    rhs.segment(m * n, n) = y0;
    if (tau && !(*tau)[static_cast<std::size_t>(m)].empty())
      rhs.segment(m * n, n) += Eigen::Map<const Eigen::VectorXd>((*tau)[static_cast<std::size_t>(m)].data(), n);
  }
  Eigen::VectorXd y = sys.fullPivLu().solve(rhs);
  return Eigen::Map<Eigen::MatrixXd>(y.data(), n, nodes);
}

double states_diff(const NodeStates& a, const NodeStates& b) {
  double d = 0;
  for (std::size_t m = 0; m < a.y.size(); ++m) d = std::max(d, max_abs_diff(a.y[m], b.y[m]));
  return d;
}

bool bitwise_equal(const NodeStates& a, const NodeStates& b) { return a.y == b.y && a.f == b.f; }

}  // namespace

TEST_CASE("hierarchy validation") {
  ProblemSpec p;
  CHECK_NOTHROW(make_hierarchy({level(16, 4), level(8, 2), level(4, 1)}, p));
  CHECK_THROWS_AS(make_hierarchy({level(16, 3), level(8, 2)}, p), Error);
  CHECK_THROWS_AS(make_hierarchy({level(16, 2), level(4, 2)}, p), Error);
  CHECK_THROWS_AS(make_hierarchy({level(16, 2, SolvePolicy::fixed(1), 2), level(8, 2, SolvePolicy::fixed(1), 4)}, p),
                  Error);
}

TEST_CASE("injection and interpolation") {
  Grid f(1, 8), c(1, 4);
  auto u = initial_condition(f, 1);
  CHECK(max_abs_diff(inject(f, c, u.values), initial_condition(c, 1).values) <= 1e-15);
  CHECK(inject(f, f, u.values) == u.values);

  // cubic interpolation reproduces cubics that vanish on the boundary
  Grid f2(2, 16), c2(2, 8);
  auto poly = [](double x) { return x * (1 - x) * (2 * x + 1); };
  auto sample = [&](const Grid& g) {
    Vector v(g.size());
    const auto e = g.extents();
    for (int j = 0; j < e[1]; ++j)
      for (int i = 0; i < e[0]; ++i)
        v[static_cast<std::size_t>(i + e[0] * j)] = poly((i + 1) * g.spacing()) * poly((j + 1) * g.spacing());
    return v;
  };
  CHECK(max_abs_diff(interpolate(c2, f2, sample(c2), 4), sample(f2)) <= 1e-14);

  // sine mode: error O(h^2) for linear, O(h^4) for cubic
  for (int order : {2, 4}) {
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
      Grid fg(1, n), cg(1, n / 2);
      err.push_back(max_abs_diff(interpolate(cg, fg, initial_condition(cg, 1).values, order),
                                 initial_condition(fg, 1).values));
    }
    CHECK(std::log2(err[1] / err[2]) >= order - 0.3);
  }
}

TEST_CASE("restriction of states") {
  ProblemSpec p;
  auto levels = make_hierarchy({level(8, 2), level(4, 1)}, p);
  auto same = make_hierarchy({level(8, 2), level(8, 2)}, p);
  auto u = initial_condition(levels[0].grid(), 1);
  auto s = spread(levels[0].problem(), levels[0].table(), u.values);
  s.y[1] = initial_condition(levels[0].grid(), 2).values;
  refresh(s, levels[0].problem());

  auto r = restrict_state(s, levels[0], levels[1]);
  CHECK(r.size() == 2);
  CHECK(max_abs_diff(r.y[1], initial_condition(levels[1].grid(), 1).values) <= 1e-15);
  for (std::size_t m = 0; m < r.y.size(); ++m) {
    Vector f(r.y[m].size());
    levels[1].problem().apply(r.y[m], f);
    CHECK(f == r.f[m]);
  }
  CHECK(bitwise_equal(restrict_state(s, same[0], same[1]), s));
}

TEST_CASE("FAS terms") {
  ProblemSpec p;
  auto same = make_hierarchy({level(16, 2), level(16, 2)}, p);
  auto s = spread(same[0].problem(), same[0].table(), initial_condition(same[0].grid(), 1).values);
  s.y[2] = initial_condition(same[0].grid(), 3).values;
  refresh(s, same[0].problem());
  auto r = restrict_state(s, same[0], same[1]);
  auto tau = compute_fas(s, r, same[0], same[1], 0.1);
  for (const auto& t : tau) CHECK(max_norm(t) == 0.0);

  auto lv = make_hierarchy({level(16, 4), level(8, 2)}, p);
  auto s2 = spread(lv[0].problem(), lv[0].table(), initial_condition(lv[0].grid(), 1).values);
  auto tau2 = compute_fas(s2, restrict_state(s2, lv[0], lv[1]), lv[0], lv[1], 0.1);
  CHECK(max_norm(tau2[0]) == 0.0);
}

TEST_CASE("FAS dense oracle, N=8 to 4, M=2 to 1") {
  ProblemSpec p;
  auto lv = make_hierarchy({level(8, 2), level(4, 1)}, p);
  const double dt = 0.05;
  const Eigen::MatrixXd af = dense(lv[0].problem().op());
  const Eigen::MatrixXd ac = dense(lv[1].problem().op());
  auto u0 = initial_condition(lv[0].grid(), 1);
  // rougher data so that tau is far from zero
  for (std::size_t i = 0; i < u0.values.size(); ++i) u0.values[i] += 0.3 * ((i % 3) - 1.0);
  Eigen::VectorXd y0f = Eigen::Map<Eigen::VectorXd>(u0.values.data(), 7);
  Eigen::MatrixXd yf = dense_collocation(af, lv[0].table().q, y0f, dt);

  NodeStates fine = spread(lv[0].problem(), lv[0].table(), u0.values);
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t i = 0; i < 7; ++i) fine.y[m][i] = yf(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
  refresh(fine, lv[0].problem());

  auto restricted = restrict_state(fine, lv[0], lv[1]);
  auto tau = compute_fas(fine, restricted, lv[0], lv[1], dt);
  CHECK(max_norm(tau[1]) > 1e-6);

  const Vector y0c_v = inject(lv[0].grid(), lv[1].grid(), u0.values);
  Eigen::VectorXd y0c = Eigen::Map<const Eigen::VectorXd>(y0c_v.data(), 3);
  Eigen::MatrixXd yc = dense_collocation(ac, lv[1].table().q, y0c, dt, &tau);
  Eigen::MatrixXd yc_plain = dense_collocation(ac, lv[1].table().q, y0c, dt);

  double dev = 0, plain = 0;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 3; ++i) {
      const double ref = restricted.y[c][i];
      dev = std::max(dev, std::abs(yc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - ref));
      plain = std::max(plain, std::abs(yc_plain(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) - ref));
    }
  CHECK(dev <= 1e-10);
  CHECK(plain > 1e-6);
}

TEST_CASE("coarse correction") {
  ProblemSpec p;
  auto lv = make_hierarchy({level(32, 2), level(16, 1)}, p);
  auto fine = spread(lv[0].problem(), lv[0].table(), initial_condition(lv[0].grid(), 1).values);
  const NodeStates before = fine;
  auto old = restrict_state(fine, lv[0], lv[1]);
  coarse_correction(fine, old, old, lv[0], lv[1]);
  CHECK(bitwise_equal(fine, before));

  // correction that is a coarse sine mode at every node
  NodeStates bumped = old;
  const auto mode = initial_condition(lv[1].grid(), 2).values;
  for (auto& y : bumped.y)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += mode[i];
  coarse_correction(fine, old, bumped, lv[0], lv[1]);
  const auto fmode = initial_condition(lv[0].grid(), 2).values;
  for (std::size_t m = 0; m < fine.y.size(); ++m) {
    Vector d(fmode.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = fine.y[m][i] - before.y[m][i];
    CHECK(max_abs_diff(d, fmode) <= 0.02);
  }

  auto same = make_hierarchy({level(16, 2), level(16, 2)}, p);
  auto fs = spread(same[0].problem(), same[0].table(), initial_condition(same[0].grid(), 1).values);
  auto olds = restrict_state(fs, same[0], same[1]);
  NodeStates news = olds;
  news.y[1] = initial_condition(same[0].grid(), 4).values;
  refresh(news, same[1].problem());
  coarse_correction(fs, olds, news, same[0], same[1]);
  CHECK(fs.y == news.y);
}

TEST_CASE("degenerate hierarchies") {
  ProblemSpec p;
  auto one = make_hierarchy({level(32, 2, SolvePolicy::fixed(2))}, p);
  auto u0 = initial_condition(one[0].grid(), 1).values;
  auto st = spread_hierarchy(one, u0);
  auto ref = spread(one[0].problem(), one[0].table(), u0);
  HeatProblem prob = one[0].problem();
  mlsdc_iteration(one, st, 0.1);
  sdc_sweep(ref, u0, nullptr, 0.1, prob);
  CHECK(bitwise_equal(st.fine(), ref));

  // two identical levels: exactly two plain sweeps
  auto two = make_hierarchy({level(32, 2, SolvePolicy::fixed(2)), level(32, 2, SolvePolicy::fixed(2))}, p);
  auto st2 = spread_hierarchy(two, u0);
  auto ref2 = spread(one[0].problem(), one[0].table(), u0);
  for (int k = 0; k < 3; ++k) {
    mlsdc_iteration(two, st2, 0.1);
    sdc_sweep(ref2, u0, nullptr, 0.1, prob);
    sdc_sweep(ref2, u0, nullptr, 0.1, prob);
    CHECK(bitwise_equal(st2.fine(), ref2));
  }

  auto exact2 = make_hierarchy({level(32, 2), level(32, 2)}, p);
  HeatProblem ep = exact2[0].problem();
  auto st3 = spread_hierarchy(exact2, u0);
  auto ref3 = spread(ep, exact2[0].table(), u0);
  mlsdc_iteration(exact2, st3, 0.1);
  sdc_sweep(ref3, u0, nullptr, 0.1, ep);
  sdc_sweep(ref3, u0, nullptr, 0.1, ep);
  CHECK(residual(st3.fine(), u0, 0.1) <= residual(ref3, u0, 0.1) * (1 + 1e-6));
}

TEST_CASE("MLSDC on the three-level configuration") {
  ProblemSpec p;
  const int n = 32;
  auto lv = make_hierarchy({level(n, 2, SolvePolicy::fixed(2)), level(n / 2, 2, SolvePolicy::fixed(2)),
                            level(n / 4, 1, SolvePolicy::fixed(2))},
                           p);
  auto u0 = initial_condition(lv[0].grid(), 1).values;
  auto run = run_mlsdc(lv, u0, 1.0, n, 1e-8, 20);
  CHECK(run.steps.back().converged);
  CHECK(run.steps.back().iterations <= 5);
  for (const auto& s : run.steps)
    for (std::size_t k = 1; k < s.residuals.size(); ++k) CHECK(s.residuals[k] < s.residuals[k - 1]);
  const double err = max_abs_diff(run.final_value, exact_pde(lv[0].grid(), 1, 1.0, 1.0).values);
  MESSAGE("MLSDC error " << err);
  CHECK(err < 1e-5);
}

TEST_CASE("MLSDC converges to the fine collocation solution") {
  ProblemSpec p;
  auto lv = make_hierarchy({level(16, 4), level(8, 2)}, p);
  auto u0 = initial_condition(lv[0].grid(), 1).values;
  auto st = spread_hierarchy(lv, u0);
  for (int k = 0; k < 30; ++k) mlsdc_iteration(lv, st, 0.1);
  auto col = collocation_solve(lv[0].problem(), lv[0].table(), u0, 0.1);
  CHECK(states_diff(st.fine(), col) <= 1e-11);
}
