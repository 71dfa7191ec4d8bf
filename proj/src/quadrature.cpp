#include "ipfasst/quadrature.hpp"

#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "ipfasst/error.hpp"

namespace ipfasst {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Coefficients in increasing powers.
using Poly = std::vector<Rational>;

Poly multiply_linear(const Poly& p, const Rational& root) {
  Poly out(p.size() + 1, Rational(0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i + 1] += p[i];
    out[i] -= root * p[i];
  }
  return out;
}

Rational integrate(const Poly& p, const Rational& upper) {
  Rational sum(0);
  Rational power = upper;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p[i] * power / Rational(static_cast<long>(i + 1));
    power *= upper;
  }
  return sum;
}

// Index of the fine node equal to coarse node `c`, or -1.
int matching_node(const NodeSet& fine, const NodeSet& coarse, int c) {
  const long num = static_cast<long>(c) * fine.substeps();
  if (num % coarse.substeps() != 0) return -1;
  return static_cast<int>(num / coarse.substeps());
}

void require_nested(const NodeSet& fine, const NodeSet& coarse) {
  for (int c = 0; c < coarse.size(); ++c) {
    if (matching_node(fine, coarse, c) < 0) {
      std::ostringstream msg;
      msg << "coarse node " << c << " (t=" << coarse[c] << ") has no matching node in the "
          << fine.substeps() << "-substep fine set";
      throw Error(msg.str());
    }
  }
}

}  // namespace

NodeSet::NodeSet(int substeps) : substeps_(substeps) {
  if (substeps < 1) throw Error("node set needs at least one sub-step");
  t_.resize(static_cast<std::size_t>(substeps) + 1);
  for (int m = 0; m <= substeps; ++m) t_[static_cast<std::size_t>(m)] = double(m) / substeps;
  t_.back() = 1.0;
}

double NodeSet::gamma(int m) const {
  if (m < 1 || m > substeps_) throw Error("sub-step index out of range");
  return (*this)[m] - (*this)[m - 1];
}

NodeSet uniform_nodes(int substeps) { return NodeSet(substeps); }

QuadratureTable build_q(const NodeSet& nodes) {
  const int M = nodes.substeps();
  QuadratureTable table{nodes, Matrix::Zero(M + 1, M + 1), Matrix::Zero(M + 1, M + 1)};

  // Exact rational integration of the Lagrange basis on t_1..t_M.
  for (int j = 1; j <= M; ++j) {
    Poly basis{Rational(1)};
    Rational denom(1);
    const Rational tj(j, M);
    for (int i = 1; i <= M; ++i) {
      if (i == j) continue;
      const Rational ti(i, M);
      basis = multiply_linear(basis, ti);
      denom *= tj - ti;
    }
    for (int m = 1; m <= M; ++m) {
      const Rational w = integrate(basis, Rational(m, M)) / denom;
      table.q(m, j) = static_cast<double>(w);
    }
  }

  for (int m = 1; m <= M; ++m)
    for (int i = 1; i <= m; ++i) table.q_delta(m, i) = nodes.gamma(i);
  return table;
}

Matrix time_restriction(const NodeSet& fine, const NodeSet& coarse) {
  require_nested(fine, coarse);
  Matrix r = Matrix::Zero(coarse.size(), fine.size());
  for (int c = 0; c < coarse.size(); ++c) r(c, matching_node(fine, coarse, c)) = 1.0;
  return r;
}

Matrix time_interpolation(const NodeSet& coarse, const NodeSet& fine) {
  require_nested(fine, coarse);
  Matrix p = Matrix::Zero(fine.size(), coarse.size());
  for (int f = 0; f < fine.size(); ++f) {
    const double t = fine[f];
    for (int j = 0; j < coarse.size(); ++j) {
      double w = 1.0;
      for (int i = 0; i < coarse.size(); ++i)
        if (i != j) w *= (t - coarse[i]) / (coarse[j] - coarse[i]);
      p(f, j) = w;
    }
  }
  // Shared nodes get exact selection rows.
  for (int c = 0; c < coarse.size(); ++c) {
    const int f = matching_node(fine, coarse, c);
    p.row(f).setZero();
    p(f, c) = 1.0;
  }
  return p;
}

}  // namespace ipfasst
