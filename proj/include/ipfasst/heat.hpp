#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace ipfasst {

using Vector = std::vector<double>;

/// Structured grid on [0, L]^dim with homogeneous Dirichlet boundaries.
/// Only the N-1 interior points per dimension are stored, x fastest.
class Grid {
 public:
  Grid(int dim, int points, double length = 1.0);

  int dim() const { return dim_; }
  int points() const { return points_; }
  double length() const { return length_; }
  double spacing() const { return length_ / points_; }
  int interior() const { return points_ - 1; }
  std::size_t size() const;

  /// Interior extents, padded with 1 for unused dimensions.
  std::array<int, 3> extents() const;
  std::array<std::ptrdiff_t, 3> strides() const;

  bool can_coarsen() const { return points_ >= 8; }
  Grid coarsened() const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_;
  int points_;
  double length_;
};

struct GridFunction {
  Grid grid;
  Vector values;

  explicit GridFunction(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  GridFunction(const Grid& g, Vector v);
};

/// nu times the finite-difference Laplacian of order 2 or 4. The order-4
/// stencil (-1, 16, -30, 16, -1)/12 drops to (1, -2, 1) at points adjacent
/// to the boundary.
class HeatOperator {
 public:
  HeatOperator(const Grid& grid, double nu, int order);

  const Grid& grid() const { return grid_; }
  double nu() const { return nu_; }
  int order() const { return order_; }

  /// out = A u
  void apply(std::span<const double> u, std::span<double> out) const;

  /// (A u) at one interior point, addressed by per-dimension position.
  double apply_at(std::span<const double> u, const std::array<int, 3>& pos) const;
  double diagonal_at(const std::array<int, 3>& pos) const;

  /// Same operator rebuilt on the next coarser grid.
  HeatOperator coarsened() const { return HeatOperator(grid_.coarsened(), nu_, order_); }

 private:
  double axis_term(std::span<const double> u, std::ptrdiff_t idx, int pos, int n,
                   std::ptrdiff_t stride) const;
  bool wide_stencil(int pos, int n) const { return order_ == 4 && pos >= 1 && pos <= n - 2; }

  Grid grid_;
  double nu_;
  int order_;
  double inv_h2_;
};

GridFunction apply_operator(const HeatOperator& op, const GridFunction& u);

/// Eigenvalue of the 1D second-order difference operator (without nu) for
/// the discrete sine mode k.
double discrete_symbol(const Grid& grid, int k);

/// Product of sin(k pi x_d / L) over dimensions, sampled at interior points.
GridFunction initial_condition(const Grid& grid, int k);

/// Exact solution of the heat equation for the sine initial condition.
GridFunction exact_pde(const Grid& grid, int k, double nu, double t);

/// Exact solution of the semi-discrete 1D order-2 system. The sine mode is an
/// eigenvector with eigenvalue nu*d(k) < 0, so the amplitude decays as
/// exp(nu*d(k)*t).
GridFunction exact_ode(const HeatOperator& op, int k, double t);

double max_norm(std::span<const double> v);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace ipfasst
