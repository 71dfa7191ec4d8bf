#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ipfasst/heat.hpp"
#include "ipfasst/multigrid.hpp"
#include "ipfasst/problem.hpp"
#include "ipfasst/quadrature.hpp"
#include "ipfasst/sdc.hpp"

namespace ipfasst {

/// Settings for one rung of the space-time hierarchy.
struct LevelSpec {
  int points = 128;        // per dimension
  int stencil_order = 2;
  int substeps = 2;        // M; M+1 stored nodes
  MgConfig mg;
  SolvePolicy policy;
  int space_interp_order = 2;  // used when interpolating a correction onto this level
};

struct ProblemSpec {
  int dim = 1;
  double length = 1.0;
  double nu = 1.0;
  int mode = 1;  // sine wave number k
};

class Level {
 public:
  Level(const LevelSpec& spec, const ProblemSpec& problem);
  Level(const Level& other);
  Level& operator=(const Level&) = delete;
  Level(Level&&) = default;

  const LevelSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }
  const QuadratureTable& table() const { return table_; }
  HeatProblem& problem() { return *problem_; }
  const HeatProblem& problem() const { return *problem_; }
  int interp_order() const { return spec_.space_interp_order; }

  /// Same grid and node set.
  bool same_discretization(const Level& other) const;

 private:
  LevelSpec spec_;
  Grid grid_;
  QuadratureTable table_;
  std::unique_ptr<HeatProblem> problem_;
};

/// Ordered fine (index 0) to coarse.
using Hierarchy = std::vector<Level>;

Hierarchy make_hierarchy(const std::vector<LevelSpec>& specs, const ProblemSpec& problem);
void validate_hierarchy(const Hierarchy& levels);
Hierarchy clone_hierarchy(const Hierarchy& levels);

/// Pointwise injection onto the coincident coarse points (identity for
/// equal grids).
Vector inject(const Grid& fine, const Grid& coarse, std::span<const double> in);

/// Interpolation of order 2 (linear) or 4 (cubic, one-sided at the
/// boundary) from `coarse` onto `fine`.
Vector interpolate(const Grid& coarse, const Grid& fine, std::span<const double> in, int order);

NodeStates restrict_state(const NodeStates& fine, const Level& fine_lvl, Level& coarse_lvl);

/// tau = R(dt Q_f F_f + tau_f) - dt Q_c F_c(R Y_f), with R acting in time by
/// node selection and in space by injection.
NodeCorrection compute_fas(const NodeStates& fine, const NodeStates& coarse_restricted,
                           const Level& fine_lvl, const Level& coarse_lvl, double dt,
                           const NodeCorrection* fine_tau = nullptr);

/// fine += P_space P_time (new_coarse - old_restricted); f refreshed.
void coarse_correction(NodeStates& fine, const NodeStates& old_restricted,
                       const NodeStates& new_coarse, Level& fine_lvl, const Level& coarse_lvl);

/// Iterate of every level within one step.
struct HierarchyState {
  std::vector<NodeStates> states;
  std::vector<Vector> y0;
  std::vector<NodeCorrection> tau;  // tau[0] stays empty

  const NodeStates& fine() const { return states.front(); }
};

/// Every level spread with the spatial injection of the fine initial value.
HierarchyState spread_hierarchy(Hierarchy& levels, std::span<const double> fine_y0);

/// Callbacks used by the time-parallel driver around individual sweeps.
struct SweepHooks {
  std::function<void(std::size_t level, Vector& y0)> before_sweep;
  std::function<void(std::size_t level, const NodeStates& states)> after_sweep;
};

/// One V-shaped pass over the hierarchy: restrict and build FAS terms going
/// down, sweep on the coarsest level, then correct and sweep each level on
/// the way up. Node 0 of every non-coarsest level is first reset to that
/// level's y0, which the pass leaves untouched. Returns V-cycles consumed.
long mlsdc_iteration(Hierarchy& levels, HierarchyState& state, double dt,
                     const SweepHooks* hooks = nullptr);

struct MlsdcRun {
  Vector final_value;
  std::vector<StepRecord> steps;
  long total_vcycles = 0;
};

/// Serial multilevel SDC over `steps` steps.
MlsdcRun run_mlsdc(Hierarchy& levels, std::span<const double> u0, double t_end, int steps,
                   double tol, int max_iter);

}  // namespace ipfasst
