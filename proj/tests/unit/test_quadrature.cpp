#include <doctest.h>

#include <cmath>
#include <limits>

#include "ipfasst/error.hpp"
#include "ipfasst/quadrature.hpp"

using namespace ipfasst;

namespace {
constexpr double eps = std::numeric_limits<double>::epsilon();
}

TEST_CASE("uniform nodes") {
  CHECK(uniform_nodes(1).points() == std::vector<double>{0.0, 1.0});
  CHECK(uniform_nodes(2).points() == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(uniform_nodes(4).points() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(uniform_nodes(0), Error);
  CHECK(uniform_nodes(4).gamma(3) == doctest::Approx(0.25));
}

TEST_CASE("M=1 is backward Euler") {
  auto t = build_q(1);
  Matrix expect(2, 2);
  expect << 0, 0, 0, 1;
  CHECK(t.q == expect);
  CHECK(t.q_delta == expect);
}

TEST_CASE("M=2 table by hand") {
  // integrals of the Lagrange basis on {1/2, 1}: l1 = 2(1-t), l2 = 2t-1
  auto t = build_q(2);
  Matrix q(3, 3), qd(3, 3);
  q << 0, 0, 0, 0, 0.75, -0.25, 0, 1, 0;
  qd << 0, 0, 0, 0, 0.5, 0, 0, 0.5, 0.5;
  CHECK((t.q - q).cwiseAbs().maxCoeff() <= 4 * eps);
  CHECK(t.q_delta == qd);
}

TEST_CASE("polynomial exactness and structure") {
  for (int M : {1, 2, 3, 4, 6, 8}) {
    CAPTURE(M);
    auto t = build_q(M);
    const auto& x = t.nodes.points();
    for (int i = 0; i <= M; ++i) {
      CHECK(t.q(0, i) == 0.0);
      CHECK(t.q(i, 0) == 0.0);
    }
    for (int j = 0; j <= M - 1; ++j)
      for (int m = 0; m <= M; ++m) {
        double s = 0;
        for (int i = 0; i <= M; ++i) s += t.q(m, i) * std::pow(x[i], j);
        CHECK(std::abs(s - std::pow(x[m], j + 1) / (j + 1)) <= 100 * eps * M * M);
      }
    for (int m = 0; m <= M; ++m) {
      CHECK(t.q_delta.row(m).sum() == doctest::Approx(x[m]).epsilon(1e-15));
      for (int i = m + 1; i <= M; ++i) CHECK(t.q_delta(m, i) == 0.0);
    }
  }
}

TEST_CASE("time restriction") {
  auto r = time_restriction(uniform_nodes(2), uniform_nodes(1));
  Matrix e(2, 3);
  e << 1, 0, 0, 0, 0, 1;
  CHECK(r == e);
  auto r2 = time_restriction(uniform_nodes(4), uniform_nodes(2));
  CHECK(r2.rows() == 3);
  CHECK(r2(0, 0) == 1.0);
  CHECK(r2(1, 2) == 1.0);
  CHECK(r2(2, 4) == 1.0);
  CHECK(r2.sum() == 3.0);
  CHECK(time_restriction(uniform_nodes(3), uniform_nodes(3)) == Matrix::Identity(4, 4));
  CHECK_THROWS_AS(time_restriction(uniform_nodes(3), uniform_nodes(2)), Error);
  try {
    time_restriction(uniform_nodes(3), uniform_nodes(2));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("time interpolation") {
  auto p = time_interpolation(uniform_nodes(1), uniform_nodes(2));
  CHECK(p(1, 0) == doctest::Approx(0.5));
  CHECK(p(1, 1) == doctest::Approx(0.5));
  CHECK(time_interpolation(uniform_nodes(2), uniform_nodes(2)) == Matrix::Identity(3, 3));

  // degree-Mc polynomials reproduced; selection rows exact
  auto c = uniform_nodes(2), f = uniform_nodes(8);
  auto P = time_interpolation(c, f);
  Eigen::VectorXd v(3);
  for (int i = 0; i < 3; ++i) v(i) = 1 - 2 * c[i] + 3 * c[i] * c[i];
  Eigen::VectorXd w = P * v;
  for (int m = 0; m <= 8; ++m) CHECK(w(m) == doctest::Approx(1 - 2 * f[m] + 3 * f[m] * f[m]));
  CHECK(time_restriction(f, c) * P == Matrix::Identity(3, 3));
}
