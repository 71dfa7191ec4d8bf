#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "ipfasst/channel.hpp"
#include "ipfasst/hierarchy.hpp"

namespace ipfasst {

/// Initial value for one level, sent forward by the owner of the previous step.
struct LevelMessage {
  int source = 0;
  std::size_t level = 0;
  int iteration = 0;  // 0 for values produced by the predictor
  Vector payload;
  bool converged = false;  // sender's state after this iteration (fine level only)
};

/// Per-time-step worker state.
struct RankState {
  int rank = 0;
  Hierarchy levels;
  HierarchyState state;
  int iteration = 0;
  bool converged = false;
  int converged_at = 0;  // iteration at which convergence was declared, 0 if never
  long vcycles = 0;
  std::vector<double> residuals;  // fine residual after each iteration
};

enum class Executor { Serial, Threaded };

struct TraceRow {
  int block;
  int rank;
  int iter;
  std::size_t level;
  double residual;
  long vcycles;
};

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

/// Called after every iteration of every rank with the rank's current
/// state. Under the threaded executor it runs on the rank's worker, so it
/// must only touch data owned by that rank.
using IterationObserver = std::function<void(int block, const RankState& rank)>;

struct PfasstOptions {
  int ranks = 1;
  int blocks = 1;
  double tol = 1e-9;
  int max_iter = 20;
  Executor executor = Executor::Serial;
  bool trace = false;
  IterationObserver observer;
};

struct RankSummary {
  int iterations = 0;
  bool converged = false;
  long vcycles = 0;
  std::vector<double> residuals;
};

struct PfasstRun {
  Vector final_value;
  /// [block][rank]
  std::vector<std::vector<RankSummary>> ranks;
  std::vector<TraceRow> trace;
  long total_vcycles = 0;
  bool all_converged = true;
};

/// Coarse-level burn-in for one rank: `sweeps` coarse sweeps, receiving a
/// new coarse initial value before every sweep but the first and sending the
/// end value after each; finer levels are then corrected by interpolation.
/// Returns V-cycles consumed.
long predictor(Hierarchy& levels, HierarchyState& state, double dt, int sweeps,
               const std::function<void(Vector& y0)>& receive,
               const std::function<void(const Vector& end)>& send);

/// Runs the predictor for a whole block of ranks, pipelined: rank n performs
/// n+1 coarse sweeps. Uses the serial schedule.
void predictor(std::vector<RankState>& ranks, double dt);

/// PFASST over `blocks` consecutive windows of `ranks` steps each.
/// At iteration k a rank takes its coarse initial value from the
/// predecessor's coarse sweep of iteration k, and its finer initial values
/// from the predecessor's end values of iteration k. The serial schedule
/// runs ranks in order within each iteration; the threaded one blocks on the
/// same messages, so both produce identical iterates.
PfasstRun pfasst_run(const Hierarchy& levels, std::span<const double> u0, double t_end,
                     const PfasstOptions& options);

/// Serial MLSDC preceded by the same single coarse predictor sweep PFASST
/// uses on its first step; reference for the one-rank case.
MlsdcRun run_mlsdc_with_predictor(Hierarchy& levels, std::span<const double> u0, double t_end,
                                  int steps, double tol, int max_iter);

}  // namespace ipfasst
