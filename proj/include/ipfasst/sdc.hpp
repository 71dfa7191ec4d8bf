#pragma once

#include <span>
#include <vector>

#include "ipfasst/problem.hpp"
#include "ipfasst/quadrature.hpp"

namespace ipfasst {

/// Solution values y_m at every node of one step plus the cached
/// right-hand side f_m = A y_m.
struct NodeStates {
  QuadratureTable table;
  std::vector<Vector> y;
  std::vector<Vector> f;

  int size() const { return table.size(); }
  const Vector& end_value() const { return y.back(); }
};

/// Per-node corrections added to the node integrals on a coarse level.
using NodeCorrection = std::vector<Vector>;

/// Every node set to y0.
NodeStates spread(const ImplicitProblem& problem, const QuadratureTable& table,
                  std::span<const double> y0);

/// Recompute f from y.
void refresh(NodeStates& states, const ImplicitProblem& problem);

/// Direct solve of (I - dt Q (x) A) Y = Y0 with a sparse LU factorization.
/// Reference only; limited to 50,000 unknowns.
NodeStates collocation_solve(const ImplicitProblem& problem, const QuadratureTable& table,
                             std::span<const double> y0, double dt);

inline constexpr std::size_t kCollocationLimit = 50000;

/// One backward-Euler correction sweep over the nodes. Sub-step m solves
///   (I - dt_m A) y_{m+1} = y_{m} - dt_m A y^k_{m+1} + dt (Q_{m+1} - Q_m) F^k + tau_{m+1} - tau_m
/// with the previous iterate as warm start. Returns V-cycles consumed.
long sdc_sweep(NodeStates& states, std::span<const double> y0, const NodeCorrection* tau,
               double dt, ImplicitProblem& problem);

/// max_m || y0 + dt (Q F)_m + tau_m - y_m ||_inf
double residual(const NodeStates& states, std::span<const double> y0, double dt,
                const NodeCorrection* tau = nullptr);

struct StepRecord {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // after each sweep
  std::vector<long> vcycles;      // per sweep
};

struct SdcRun {
  Vector final_value;
  std::vector<StepRecord> steps;
  long total_vcycles = 0;

  double final_residual() const {
    return steps.empty() || steps.back().residuals.empty() ? 0.0 : steps.back().residuals.back();
  }
};

/// Serial time stepping with SDC (exact or inexact sub-step solves, as set
/// by the problem's solve policy). Each step sweeps until the residual is at
/// most `tol` or `max_iter` sweeps were done. With `relative`, the tolerance
/// of each step is scaled by the max norm of that step's initial value.
SdcRun run_sdc(ImplicitProblem& problem, const QuadratureTable& table,
               std::span<const double> u0, double t_end, int steps, double tol, int max_iter,
               bool relative = false);

}  // namespace ipfasst
