#pragma once

#include <map>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ipfasst/heat.hpp"

namespace ipfasst {

/// I - shift * A for a heat operator A; one per implicit sub-step size.
struct ShiftedOperator {
  HeatOperator heat;
  double shift;

  void apply(std::span<const double> u, std::span<double> out) const;
  double apply_at(std::span<const double> u, const std::array<int, 3>& pos) const {
    return u[index(pos)] - shift * heat.apply_at(u, pos);
  }
  double diagonal_at(const std::array<int, 3>& pos) const {
    return 1.0 - shift * heat.diagonal_at(pos);
  }
  std::size_t index(const std::array<int, 3>& pos) const;
};

enum class SmootherKind { WeightedJacobi, GaussSeidelLex, JorRedBlack };

struct Smoother {
  SmootherKind kind = SmootherKind::WeightedJacobi;
  double omega = 2.0 / 3.0;  // unused by Gauss-Seidel
};

struct MgConfig {
  Smoother smoother;
  int pre_sweeps = 2;
  int post_sweeps = 2;
  int coarsest_points = 4;  // points per dimension on the direct-solve level

  void validate() const;
};

struct FixedCycles {
  int count = 2;
};

/// Relative tolerance on ||b - Su||_2 plus a stall test against the
/// previous cycle's residual.
struct ToTolerance {
  double tol = 1e-12;
  double stall_factor = 0.75;
};

struct SolvePolicy {
  std::variant<FixedCycles, ToTolerance> rule = FixedCycles{};

  static SolvePolicy fixed(int cycles) { return {FixedCycles{cycles}}; }
  static SolvePolicy to_tolerance(double tol, double stall_factor = 0.75) {
    return {ToTolerance{tol, stall_factor}};
  }
  bool is_fixed() const { return std::holds_alternative<FixedCycles>(rule); }
  void validate() const;
};

enum class SolveStatus { Converged, Stalled, FixedBudget };

struct SolveResult {
  int cycles = 0;
  SolveStatus status = SolveStatus::FixedBudget;
  double residual = 0.0;  // ||b - Su||_2 at exit; only computed for ToTolerance
};

inline constexpr int kMaxCycles = 100;

/// Geometric multigrid hierarchy for I - shift*A built by rediscretizing A
/// on successively halved grids. Holds per-level scratch space, so one
/// instance must not be shared between concurrent solves.
class Multigrid {
 public:
  Multigrid(const HeatOperator& fine, MgConfig cfg);

  const MgConfig& config() const { return cfg_; }
  const HeatOperator& fine_operator() const { return levels_.front().op; }
  std::size_t depth() const { return levels_.size(); }

  void smooth(double shift, std::span<double> u, std::span<const double> b, int count) {
    smooth_level(0, shift, u, b, count);
  }
  void v_cycle(double shift, std::span<double> u, std::span<const double> b);

  /// Throws NonConvergence when the ToTolerance cap is hit.
  SolveResult solve(double shift, std::span<double> u, std::span<const double> b,
                    const SolvePolicy& policy);

  double residual_norm(double shift, std::span<const double> u, std::span<const double> b);

 private:
  struct Level {
    HeatOperator op;
    Vector u, b, r;
  };

  void smooth_level(std::size_t l, double shift, std::span<double> u, std::span<const double> b,
                    int count);
  void cycle(std::size_t l, double shift, std::span<double> u, std::span<const double> b);
  void coarse_solve(double shift, std::span<double> u, std::span<const double> b);

  MgConfig cfg_;
  std::vector<Level> levels_;
  std::map<double, Eigen::PartialPivLU<Eigen::MatrixXd>> coarse_lu_;
};

void smooth(const ShiftedOperator& op, std::span<double> u, std::span<const double> b,
            const Smoother& smoother, int count);

/// Full-weighting restriction to the next coarser grid.
void restrict_full_weighting(const Grid& fine, std::span<const double> in, std::span<double> out);
/// Adds the linear interpolant of the coarse values to `out` on the fine grid.
void add_linear_interpolation(const Grid& coarse, std::span<const double> in,
                              std::span<double> out);

// Free-function forms working on grid functions.
GridFunction smooth(const ShiftedOperator& op, const GridFunction& u, const GridFunction& b,
                    const MgConfig& cfg, int count);
GridFunction v_cycle(const ShiftedOperator& op, const GridFunction& u, const GridFunction& b,
                     const MgConfig& cfg);
std::pair<GridFunction, SolveResult> solve(const ShiftedOperator& op, const GridFunction& u0,
                                           const GridFunction& b, const MgConfig& cfg,
                                           const SolvePolicy& policy);

}  // namespace ipfasst
