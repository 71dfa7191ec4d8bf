#include "ipfasst/problem.hpp"

namespace ipfasst {

HeatProblem::HeatProblem(const HeatOperator& op, const MgConfig& cfg, const SolvePolicy& policy)
    : op_(op), cfg_(cfg), policy_(policy), mg_(op, cfg) {
  policy_.validate();
}

SolveResult HeatProblem::solve_shifted(double shift, std::span<const double> rhs,
                                       std::span<double> x) {
  const SolveResult r = mg_.solve(shift, x, rhs, policy_);
  vcycles_ += r.cycles;
  return r;
}

Triplets HeatProblem::triplets() const { return heat_triplets(op_); }

std::unique_ptr<ImplicitProblem> HeatProblem::clone() const {
  return std::make_unique<HeatProblem>(op_, cfg_, policy_);
}

SolveResult ScalarProblem::solve_shifted(double shift, std::span<const double> rhs,
                                         std::span<double> x) {
  x[0] = rhs[0] / (1.0 - shift * lambda_);
  return {0, SolveStatus::Converged, 0.0};
}

Triplets heat_triplets(const HeatOperator& op) {
  const Grid& g = op.grid();
  const auto e = g.extents();
  const auto s = g.strides();
  const double scale = op.nu() / (g.spacing() * g.spacing());
  Triplets t;
  t.reserve(g.size() * static_cast<std::size_t>(1 + 4 * g.dim()));
  std::size_t row = 0;
  for (int k = 0; k < e[2]; ++k)
    for (int j = 0; j < e[1]; ++j)
      for (int i = 0; i < e[0]; ++i, ++row) {
        const std::array<int, 3> pos{i, j, k};
        for (int d = 0; d < g.dim(); ++d) {
          const auto dd = static_cast<std::size_t>(d);
          const int p = pos[dd];
          const int n = e[dd];
          const bool wide = op.order() == 4 && p >= 1 && p <= n - 2;
          static constexpr double narrow_w[5] = {0.0, 1.0, -2.0, 1.0, 0.0};
          static constexpr double wide_w[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12,
                                               -1.0 / 12};
          const double* w = wide ? wide_w : narrow_w;
          for (int off = -2; off <= 2; ++off) {
            const double c = w[off + 2];
            if (c == 0.0 || p + off < 0 || p + off >= n) continue;
            const auto col = static_cast<std::ptrdiff_t>(row) + off * s[dd];
            t.emplace_back(static_cast<int>(row), static_cast<int>(col), scale * c);
          }
        }
      }
  return t;
}

}  // namespace ipfasst
