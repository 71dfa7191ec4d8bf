#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ipfasst {

using Matrix = Eigen::MatrixXd;

/// Uniform nodes t_m = m/M on the unit interval, m = 0..M. Node 0 is the
/// left endpoint of the step and is never used as a quadrature point.
class NodeSet {
 public:
  explicit NodeSet(int substeps);

  int substeps() const { return substeps_; }
  int size() const { return substeps_ + 1; }
  double operator[](int m) const { return t_[static_cast<std::size_t>(m)]; }
  const std::vector<double>& points() const { return t_; }

  /// Fraction of the step covered by sub-step m (1 <= m <= M).
  double gamma(int m) const;

  bool operator==(const NodeSet& other) const { return substeps_ == other.substeps_; }

 private:
  int substeps_;
  std::vector<double> t_;
};

NodeSet uniform_nodes(int substeps);

/// Integration matrices for one step.
///
/// Row m of `q` holds the weights of the node-to-node integral from t_0 to
/// t_m, scaled to a unit step; weights are built from the Lagrange basis on
/// t_1..t_M only, so column 0 vanishes. `q_delta` is the backward-Euler
/// sub-stepping matrix with entry (m, i) = gamma_i for 1 <= i <= m.
struct QuadratureTable {
  NodeSet nodes;
  Matrix q;
  Matrix q_delta;

  int substeps() const { return nodes.substeps(); }
  int size() const { return nodes.size(); }
};

QuadratureTable build_q(const NodeSet& nodes);
inline QuadratureTable build_q(int substeps) { return build_q(uniform_nodes(substeps)); }

/// Selection matrix (Mc+1)x(Mf+1) picking the fine nodes that coincide with
/// the coarse ones. Throws if the coarse set is not nested in the fine set.
Matrix time_restriction(const NodeSet& fine, const NodeSet& coarse);

/// (Mf+1)x(Mc+1) matrix evaluating the Lagrange interpolant through all
/// coarse nodes at the fine nodes.
Matrix time_interpolation(const NodeSet& coarse, const NodeSet& fine);

}  // namespace ipfasst
