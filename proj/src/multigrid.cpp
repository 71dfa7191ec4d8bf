#include "ipfasst/multigrid.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ipfasst/error.hpp"

namespace ipfasst {

namespace {

template <class F>
void for_each_point(const Grid& grid, F&& f) {
  const auto e = grid.extents();
  std::size_t idx = 0;
  for (int k = 0; k < e[2]; ++k)
    for (int j = 0; j < e[1]; ++j)
      for (int i = 0; i < e[0]; ++i, ++idx) f(std::array<int, 3>{i, j, k}, idx);
}

double l2_norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

void check_sizes(const Grid& grid, std::size_t a, std::size_t b) {
  if (a != grid.size() || b != grid.size()) throw Error("vector size does not match the grid");
}

// Per-dimension interpolation weights of the coarse points around fine
// position `fine_pos`; an out-of-range coarse index is the boundary (zero).
int linear_weights(int fine_pos, int coarse_n, std::array<int, 2>& idx, std::array<double, 2>& w) {
  if (fine_pos % 2 == 1) {
    idx[0] = (fine_pos - 1) / 2;
    w[0] = 1.0;
    return 1;
  }
  int count = 0;
  const int left = fine_pos / 2 - 1;
  const int right = fine_pos / 2;
  if (left >= 0) {
    idx[static_cast<std::size_t>(count)] = left;
    w[static_cast<std::size_t>(count++)] = 0.5;
  }
  if (right < coarse_n) {
    idx[static_cast<std::size_t>(count)] = right;
    w[static_cast<std::size_t>(count++)] = 0.5;
  }
  return count;
}

}  // namespace

void MgConfig::validate() const {
  if (pre_sweeps < 0 || post_sweeps < 0) throw ConfigError("smoothing sweep counts must be >= 0");
  if (coarsest_points < 4) throw ConfigError("coarsest grid needs at least 4 points per dimension");
  if (smoother.kind != SmootherKind::GaussSeidelLex && !(smoother.omega > 0.0))
    throw ConfigError("smoother damping must be positive");
}

void SolvePolicy::validate() const {
  if (const auto* f = std::get_if<FixedCycles>(&rule)) {
    if (f->count < 1) throw ConfigError("fixed V-cycle budget must be >= 1");
  } else {
    const auto& t = std::get<ToTolerance>(rule);
    if (!(t.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (!(t.stall_factor > 0.0 && t.stall_factor < 1.0))
      throw ConfigError("stall factor must lie in (0, 1)");
  }
}

std::size_t ShiftedOperator::index(const std::array<int, 3>& pos) const {
  const auto s = heat.grid().strides();
  return static_cast<std::size_t>(pos[0] + pos[1] * s[1] + pos[2] * s[2]);
}

void ShiftedOperator::apply(std::span<const double> u, std::span<double> out) const {
  heat.apply(u, out);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - shift * out[i];
}

void smooth(const ShiftedOperator& op, std::span<double> u, std::span<const double> b,
            const Smoother& smoother, int count) {
  const Grid& grid = op.heat.grid();
  check_sizes(grid, u.size(), b.size());
  Vector r(u.size());
  for (int sweep = 0; sweep < count; ++sweep) {
    switch (smoother.kind) {
      case SmootherKind::WeightedJacobi:
        for_each_point(grid, [&](const auto& pos, std::size_t i) {
          r[i] = (b[i] - op.apply_at(u, pos)) / op.diagonal_at(pos);
        });
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += smoother.omega * r[i];
        break;
      case SmootherKind::GaussSeidelLex:
        for_each_point(grid, [&](const auto& pos, std::size_t i) {
          u[i] += (b[i] - op.apply_at(u, pos)) / op.diagonal_at(pos);
        });
        break;
      case SmootherKind::JorRedBlack:
        for (int color = 0; color < 2; ++color) {
          auto same_color = [color](const std::array<int, 3>& p) {
            return (p[0] + p[1] + p[2]) % 2 == color;
          };
          for_each_point(grid, [&](const auto& pos, std::size_t i) {
            if (same_color(pos)) r[i] = (b[i] - op.apply_at(u, pos)) / op.diagonal_at(pos);
          });
          for_each_point(grid, [&](const auto& pos, std::size_t i) {
            if (same_color(pos)) u[i] += smoother.omega * r[i];
          });
        }
        break;
    }
  }
}

void restrict_full_weighting(const Grid& fine, std::span<const double> in, std::span<double> out) {
  const Grid coarse = fine.coarsened();
  check_sizes(fine, in.size(), in.size());
  check_sizes(coarse, out.size(), out.size());
  const auto s = fine.strides();
  const int dim = fine.dim();
  static constexpr double w1[3] = {0.25, 0.5, 0.25};
  for_each_point(coarse, [&](const auto& cpos, std::size_t ci) {
    const std::ptrdiff_t center =
        (2 * cpos[0] + 1) + (dim > 1 ? (2 * cpos[1] + 1) * s[1] : 0) +
        (dim > 2 ? (2 * cpos[2] + 1) * s[2] : 0);
    double sum = 0.0;
    const int kz = dim > 2 ? 1 : 0;
    const int ky = dim > 1 ? 1 : 0;
    for (int c = -kz; c <= kz; ++c)
      for (int b = -ky; b <= ky; ++b)
        for (int a = -1; a <= 1; ++a) {
          double w = w1[a + 1];
          if (dim > 1) w *= w1[b + 1];
          if (dim > 2) w *= w1[c + 1];
          sum += w * in[static_cast<std::size_t>(center + a + b * s[1] + c * s[2])];
        }
    out[ci] = sum;
  });
}

void add_linear_interpolation(const Grid& coarse, std::span<const double> in,
                              std::span<double> out) {
  const Grid fine(coarse.dim(), coarse.points() * 2, coarse.length());
  check_sizes(coarse, in.size(), in.size());
  check_sizes(fine, out.size(), out.size());
  const auto ce = coarse.extents();
  const auto cs = coarse.strides();
  const int dim = coarse.dim();
  for_each_point(fine, [&](const auto& fpos, std::size_t fi) {
    std::array<std::array<int, 2>, 3> idx{};
    std::array<std::array<double, 2>, 3> w{};
    std::array<int, 3> n{1, 1, 1};
    for (int d = 0; d < dim; ++d) {
      const auto dd = static_cast<std::size_t>(d);
      n[dd] = linear_weights(fpos[dd], ce[dd], idx[dd], w[dd]);
    }
    for (int d = dim; d < 3; ++d) {
      const auto dd = static_cast<std::size_t>(d);
      idx[dd] = {0, 0};
      w[dd] = {1.0, 0.0};
    }
    double sum = 0.0;
    for (int c = 0; c < n[2]; ++c)
      for (int b = 0; b < n[1]; ++b)
        for (int a = 0; a < n[0]; ++a) {
          const std::ptrdiff_t ci = idx[0][static_cast<std::size_t>(a)] +
                                    idx[1][static_cast<std::size_t>(b)] * cs[1] +
                                    idx[2][static_cast<std::size_t>(c)] * cs[2];
          sum += w[0][static_cast<std::size_t>(a)] * w[1][static_cast<std::size_t>(b)] *
                 w[2][static_cast<std::size_t>(c)] * in[static_cast<std::size_t>(ci)];
        }
    out[fi] += sum;
  });
}

Multigrid::Multigrid(const HeatOperator& fine, MgConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  HeatOperator op = fine;
  for (;;) {
    const std::size_t n = op.grid().size();
    levels_.push_back(Level{op, Vector(n), Vector(n), Vector(n)});
    if (op.grid().points() <= cfg_.coarsest_points || !op.grid().can_coarsen()) break;
    op = op.coarsened();
  }
}

double Multigrid::residual_norm(double shift, std::span<const double> u,
                                std::span<const double> b) {
  Level& top = levels_.front();
  ShiftedOperator{top.op, shift}.apply(u, top.r);
  for (std::size_t i = 0; i < b.size(); ++i) top.r[i] = b[i] - top.r[i];
  return l2_norm(top.r);
}

void Multigrid::smooth_level(std::size_t l, double shift, std::span<double> u,
                             std::span<const double> b, int count) {
  ipfasst::smooth(ShiftedOperator{levels_[l].op, shift}, u, b, cfg_.smoother, count);
}

void Multigrid::coarse_solve(double shift, std::span<double> u, std::span<const double> b) {
  auto it = coarse_lu_.find(shift);
  if (it == coarse_lu_.end()) {
    const ShiftedOperator op{levels_.back().op, shift};
    const auto n = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXd dense(n, n);
    Vector e(b.size(), 0.0), col(b.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      e[static_cast<std::size_t>(j)] = 1.0;
      op.apply(e, col);
      e[static_cast<std::size_t>(j)] = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) dense(i, j) = col[static_cast<std::size_t>(i)];
    }
    it = coarse_lu_.emplace(shift, Eigen::PartialPivLU<Eigen::MatrixXd>(dense)).first;
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())) = it->second.solve(rhs);
}

void Multigrid::cycle(std::size_t l, double shift, std::span<double> u, std::span<const double> b) {
  if (l + 1 == levels_.size()) {
    coarse_solve(shift, u, b);
    return;
  }
  Level& lv = levels_[l];
  Level& next = levels_[l + 1];
  const ShiftedOperator op{lv.op, shift};

  smooth_level(l, shift, u, b, cfg_.pre_sweeps);
  op.apply(u, lv.r);
  for (std::size_t i = 0; i < u.size(); ++i) lv.r[i] = b[i] - lv.r[i];
  restrict_full_weighting(lv.op.grid(), lv.r, next.b);
  std::fill(next.u.begin(), next.u.end(), 0.0);
  cycle(l + 1, shift, next.u, next.b);
  add_linear_interpolation(next.op.grid(), next.u, u);
  smooth_level(l, shift, u, b, cfg_.post_sweeps);
}

void Multigrid::v_cycle(double shift, std::span<double> u, std::span<const double> b) {
  check_sizes(levels_.front().op.grid(), u.size(), b.size());
  cycle(0, shift, u, b);
}

SolveResult Multigrid::solve(double shift, std::span<double> u, std::span<const double> b,
                             const SolvePolicy& policy) {
  check_sizes(levels_.front().op.grid(), u.size(), b.size());
  if (const auto* fixed = std::get_if<FixedCycles>(&policy.rule)) {
    for (int c = 0; c < fixed->count; ++c) cycle(0, shift, u, b);
    return {fixed->count, SolveStatus::FixedBudget, 0.0};
  }
  const auto& rule = std::get<ToTolerance>(policy.rule);
  const double target = rule.tol * l2_norm(b);
  double res = residual_norm(shift, u, b);
  if (res <= target) return {0, SolveStatus::Converged, res};
  for (int c = 1; c <= kMaxCycles; ++c) {
    cycle(0, shift, u, b);
    const double next = residual_norm(shift, u, b);
    if (next <= target) return {c, SolveStatus::Converged, next};
    if (next >= rule.stall_factor * res) return {c, SolveStatus::Stalled, next};
    res = next;
  }
  std::ostringstream msg;
  msg << "multigrid did not converge in " << kMaxCycles << " cycles (residual " << res << ")";
  throw NonConvergence(msg.str(), res);
}

GridFunction smooth(const ShiftedOperator& op, const GridFunction& u, const GridFunction& b,
                    const MgConfig& cfg, int count) {
  GridFunction out = u;
  smooth(op, out.values, b.values, cfg.smoother, count);
  return out;
}

GridFunction v_cycle(const ShiftedOperator& op, const GridFunction& u, const GridFunction& b,
                     const MgConfig& cfg) {
  Multigrid mg(op.heat, cfg);
  GridFunction out = u;
  mg.v_cycle(op.shift, out.values, b.values);
  return out;
}

std::pair<GridFunction, SolveResult> solve(const ShiftedOperator& op, const GridFunction& u0,
                                           const GridFunction& b, const MgConfig& cfg,
                                           const SolvePolicy& policy) {
  policy.validate();
  Multigrid mg(op.heat, cfg);
  GridFunction out = u0;
  const SolveResult result = mg.solve(op.shift, out.values, b.values, policy);
  return {std::move(out), result};
}

}  // namespace ipfasst
