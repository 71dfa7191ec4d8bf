#include "ipfasst/analysis.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "ipfasst/error.hpp"

namespace ipfasst {

Matrix iteration_matrix(const QuadratureTable& table, double z) {
  const Eigen::Index n = table.size();
  const Matrix lhs = Matrix::Identity(n, n) - z * table.q_delta;
  // Lower triangular with diagonal 1 - z*gamma_m; positive for z <= 0.
  for (Eigen::Index i = 0; i < n; ++i)
    if (lhs(i, i) == 0.0) throw Error("sweep preconditioner is singular for this lambda*dt");
  const Matrix rhs = z * (table.q - table.q_delta);
  return lhs.triangularView<Eigen::Lower>().solve(rhs);
}

double damping_factor(const QuadratureTable& table, double z) {
  const Matrix full = iteration_matrix(table, z);
  const Eigen::Index m = table.substeps();
  const Matrix active = full.bottomRightCorner(m, m);
  Eigen::EigenSolver<Matrix> es(active, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> default_damping_grid(int points, double min_abs, double max_abs) {
  if (points < 2 || !(min_abs > 0.0) || !(max_abs > min_abs)) throw Error("invalid damping grid");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double lo = std::log10(min_abs);
  const double hi = std::log10(max_abs);
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] = -std::pow(10.0, lo + (hi - lo) * i / (points - 1));
  return grid;
}

DampingScan damping_scan(const QuadratureTable& table, const std::vector<double>& grid) {
  DampingScan scan;
  scan.reserve(grid.size());
  for (double z : grid) {
    if (z > 0.0) throw Error("damping scan is restricted to the negative real axis");
    scan.push_back({z, damping_factor(table, z)});
  }
  return scan;
}

}  // namespace ipfasst
