#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "ipfasst/config.hpp"

namespace ipfasst {

using Cell = std::variant<std::monostate, long long, double, std::string>;

/// Experiment output: named columns, one row per record. The last column of
/// every experiment table is `status` ("ok" or "not_converged").
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t column(const std::string& name) const;
  /// Numeric value of a cell; NaN for empty cells.
  double num(std::size_t row, const std::string& name) const;
  std::string str(std::size_t row, const std::string& name) const;
  bool all_ok() const;
};

/// Header row, the rows, then one `#` comment line with the resolved config.
void write_csv(std::ostream& out, const Table& table, const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
Table run_experiment(const ExperimentConfig& cfg);

// columns: nodes, z, rho, status
Table damping_experiment(const ExperimentConfig& cfg);
// columns: order, nt, ode_error, pde_error, residual, iterations, vcycles, status
Table order_study(const ExperimentConfig& cfg);
// columns: vcycles_per_solve, iter, ode_error, pde_error, residual, max_residual, status
Table vcycle_study(const ExperimentConfig& cfg);
// columns: n, iter, ode_error, pde_error, residual, max_residual, status
Table weak_scaling(const ExperimentConfig& cfg);
// columns: variant, step, iterations, vcycles, residual, pde_error, status
// (pde_error is filled on the last step of each variant only)
Table strong_3d(const ExperimentConfig& cfg);
// columns: step, iterations, vcycles, residual, ode_error, pde_error, status
Table single_run(const ExperimentConfig& cfg);

}  // namespace ipfasst
