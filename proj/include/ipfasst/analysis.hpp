#pragma once

#include <vector>

#include "ipfasst/quadrature.hpp"

namespace ipfasst {

/// Error propagation matrix of one SDC sweep for y' = lambda y:
/// (I - z Q_delta)^{-1} z (Q - Q_delta) with z = lambda*dt.
Matrix iteration_matrix(const QuadratureTable& table, double z);

/// Spectral radius of the iteration matrix, taken on rows/columns 1..M
/// (row and column 0 are structurally zero).
double damping_factor(const QuadratureTable& table, double z);

struct DampingSample {
  double z;
  double rho;
};

using DampingScan = std::vector<DampingSample>;

/// Default grid: 200 points with |z| logarithmic from 1e-3 to 1e6, z
/// strictly decreasing.
std::vector<double> default_damping_grid(int points = 200, double min_abs = 1e-3,
                                         double max_abs = 1e6);

DampingScan damping_scan(const QuadratureTable& table, const std::vector<double>& grid);
inline DampingScan damping_scan(const QuadratureTable& table) {
  return damping_scan(table, default_damping_grid());
}

}  // namespace ipfasst
