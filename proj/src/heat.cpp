#include "ipfasst/heat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ipfasst/error.hpp"

namespace ipfasst {

Grid::Grid(int dim, int points, double length) : dim_(dim), points_(points), length_(length) {
  if (dim < 1 || dim > 3) throw Error("grid dimension must be 1, 2 or 3");
  if (points < 4 || (points & (points - 1)) != 0)
    throw Error("grid points per dimension must be a power of two >= 4");
  if (!(length > 0.0)) throw Error("domain length must be positive");
}

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int d = 0; d < dim_; ++d) n *= static_cast<std::size_t>(interior());
  return n;
}

std::array<int, 3> Grid::extents() const {
  std::array<int, 3> e{1, 1, 1};
  for (int d = 0; d < dim_; ++d) e[static_cast<std::size_t>(d)] = interior();
  return e;
}

std::array<std::ptrdiff_t, 3> Grid::strides() const {
  const auto e = extents();
  return {1, e[0], std::ptrdiff_t(e[0]) * e[1]};
}

Grid Grid::coarsened() const {
  if (!can_coarsen()) throw Error("grid cannot be coarsened below 4 points per dimension");
  return Grid(dim_, points_ / 2, length_);
}

GridFunction::GridFunction(const Grid& g, Vector v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw Error("grid function size does not match its grid");
}

HeatOperator::HeatOperator(const Grid& grid, double nu, int order)
    : grid_(grid), nu_(nu), order_(order), inv_h2_(1.0 / (grid.spacing() * grid.spacing())) {
  if (order != 2 && order != 4) throw Error("stencil order must be 2 or 4");
  if (!(nu > 0.0)) throw Error("diffusivity must be positive");
}

double HeatOperator::axis_term(std::span<const double> u, std::ptrdiff_t idx, int pos, int n,
                               std::ptrdiff_t stride) const {
  auto at = [&](int off) {
    const int p = pos + off;
    return (p < 0 || p >= n) ? 0.0 : u[static_cast<std::size_t>(idx + off * stride)];
  };
  const double c = u[static_cast<std::size_t>(idx)];
  if (wide_stencil(pos, n))
    return (-at(-2) + 16.0 * at(-1) - 30.0 * c + 16.0 * at(1) - at(2)) * (inv_h2_ / 12.0);
  return (at(-1) - 2.0 * c + at(1)) * inv_h2_;
}

double HeatOperator::apply_at(std::span<const double> u, const std::array<int, 3>& pos) const {
  const auto e = grid_.extents();
  const auto s = grid_.strides();
  const std::ptrdiff_t idx = pos[0] + pos[1] * s[1] + pos[2] * s[2];
  double sum = 0.0;
  for (int d = 0; d < grid_.dim(); ++d) {
    const auto dd = static_cast<std::size_t>(d);
    sum += axis_term(u, idx, pos[dd], e[dd], s[dd]);
  }
  return nu_ * sum;
}

double HeatOperator::diagonal_at(const std::array<int, 3>& pos) const {
  const auto e = grid_.extents();
  double sum = 0.0;
  for (int d = 0; d < grid_.dim(); ++d) {
    const auto dd = static_cast<std::size_t>(d);
    sum += wide_stencil(pos[dd], e[dd]) ? -30.0 / 12.0 : -2.0;
  }
  return nu_ * sum * inv_h2_;
}

void HeatOperator::apply(std::span<const double> u, std::span<double> out) const {
  if (u.size() != grid_.size() || out.size() != grid_.size())
    throw Error("operator applied to a vector of the wrong size");
  const auto e = grid_.extents();
  std::size_t idx = 0;
  for (int k = 0; k < e[2]; ++k)
    for (int j = 0; j < e[1]; ++j)
      for (int i = 0; i < e[0]; ++i, ++idx) out[idx] = apply_at(u, {i, j, k});
}

GridFunction apply_operator(const HeatOperator& op, const GridFunction& u) {
  if (!(u.grid == op.grid())) throw Error("grid function does not live on the operator's grid");
  GridFunction out(u.grid);
  op.apply(u.values, out.values);
  return out;
}

double discrete_symbol(const Grid& grid, int k) {
  if (k < 1 || k > grid.points() - 1) throw Error("sine mode index out of range");
  const double h = grid.spacing();
  return (-2.0 + 2.0 * std::cos(k * std::numbers::pi * h / grid.length())) / (h * h);
}

GridFunction initial_condition(const Grid& grid, int k) {
  GridFunction u(grid);
  const auto e = grid.extents();
  const double h = grid.spacing();
  auto mode = [&](int pos) { return std::sin(k * std::numbers::pi * (pos + 1) * h / grid.length()); };
  std::size_t idx = 0;
  for (int c = 0; c < e[2]; ++c)
    for (int b = 0; b < e[1]; ++b)
      for (int a = 0; a < e[0]; ++a, ++idx) {
        double v = mode(a);
        if (grid.dim() > 1) v *= mode(b);
        if (grid.dim() > 2) v *= mode(c);
        u.values[idx] = v;
      }
  return u;
}

GridFunction exact_pde(const Grid& grid, int k, double nu, double t) {
  GridFunction u = initial_condition(grid, k);
  const double wave = k * std::numbers::pi / grid.length();
  const double decay = std::exp(-nu * grid.dim() * wave * wave * t);
  for (double& v : u.values) v *= decay;
  return u;
}

GridFunction exact_ode(const HeatOperator& op, int k, double t) {
  if (op.grid().dim() != 1 || op.order() != 2)
    throw Error("exact semi-discrete solution is only available for the 1D order-2 operator");
  GridFunction u = initial_condition(op.grid(), k);
  const double decay = std::exp(op.nu() * discrete_symbol(op.grid(), k) * t);
  for (double& v : u.values) v *= decay;
  return u;
}

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("size mismatch in difference norm");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ipfasst
