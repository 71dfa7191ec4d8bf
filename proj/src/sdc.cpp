#include "ipfasst/sdc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "ipfasst/error.hpp"

namespace ipfasst {

NodeStates spread(const ImplicitProblem& problem, const QuadratureTable& table,
                  std::span<const double> y0) {
  if (y0.size() != problem.size()) throw Error("initial value does not match the problem size");
  NodeStates s{table, {}, {}};
  const auto nodes = static_cast<std::size_t>(table.size());
  s.y.assign(nodes, Vector(y0.begin(), y0.end()));
  s.f.assign(nodes, Vector(y0.size()));
  refresh(s, problem);
  return s;
}

void refresh(NodeStates& states, const ImplicitProblem& problem) {
  for (std::size_t m = 0; m < states.y.size(); ++m) problem.apply(states.y[m], states.f[m]);
}

NodeStates collocation_solve(const ImplicitProblem& problem, const QuadratureTable& table,
                             std::span<const double> y0, double dt) {
  const std::size_t n = problem.size();
  const auto nodes = static_cast<std::size_t>(table.size());
  if (n * nodes > kCollocationLimit) throw Error("collocation system too large for direct solve");
  if (y0.size() != n) throw Error("initial value does not match the problem size");

  const Triplets a = problem.triplets();
  Triplets big;
  big.reserve(nodes * n + nodes * nodes * a.size());
  for (std::size_t m = 0; m < nodes; ++m) {
    for (std::size_t i = 0; i < n; ++i)
      big.emplace_back(static_cast<int>(m * n + i), static_cast<int>(m * n + i), 1.0);
    for (std::size_t j = 0; j < nodes; ++j) {
      const double w = dt * table.q(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
      if (w == 0.0) continue;
      for (const auto& t : a)
        big.emplace_back(static_cast<int>(m * n) + t.row(), static_cast<int>(j * n) + t.col(),
                         -w * t.value());
    }
  }
  const auto dim = static_cast<Eigen::Index>(n * nodes);
  Eigen::SparseMatrix<double> system(dim, dim);
  system.setFromTriplets(big.begin(), big.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw Error("collocation system is singular");

  Eigen::VectorXd rhs(dim);
  for (std::size_t m = 0; m < nodes; ++m)
    for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(m * n + i)) = y0[i];
  const Eigen::VectorXd sol = lu.solve(rhs);

  NodeStates s = spread(problem, table, y0);
  for (std::size_t m = 0; m < nodes; ++m)
    for (std::size_t i = 0; i < n; ++i) s.y[m][i] = sol(static_cast<Eigen::Index>(m * n + i));
  refresh(s, problem);
  return s;
}

long sdc_sweep(NodeStates& states, std::span<const double> y0, const NodeCorrection* tau,
               double dt, ImplicitProblem& problem) {
  const QuadratureTable& table = states.table;
  const int M = table.substeps();
  const std::size_t n = problem.size();
  if (y0.size() != n) throw Error("initial value does not match the problem size");

  const std::vector<Vector> f_old = states.f;
  std::copy(y0.begin(), y0.end(), states.y[0].begin());
  problem.apply(states.y[0], states.f[0]);

  long cycles = 0;
  Vector rhs(n);
  for (int m = 0; m < M; ++m) {
    const auto next = static_cast<std::size_t>(m + 1);
    const double dtm = dt * table.nodes.gamma(m + 1);
    const Vector& prev = states.y[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < n; ++i) rhs[i] = prev[i] - dtm * f_old[next][i];
    for (int j = 0; j <= M; ++j) {
      const double w = dt * (table.q(m + 1, j) - table.q(m, j));
      if (w == 0.0) continue;
      const Vector& fj = f_old[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < n; ++i) rhs[i] += w * fj[i];
    }
    if (tau) {
      const Vector& hi = (*tau)[next];
      const Vector& lo = (*tau)[static_cast<std::size_t>(m)];
      for (std::size_t i = 0; i < n; ++i) rhs[i] += hi[i] - lo[i];
    }
    try {
      cycles += problem.solve_shifted(dtm, rhs, states.y[next]).cycles;
    } catch (const NonConvergence& e) {
      std::ostringstream msg;
      msg << "sub-step " << m << ": " << e.what();
      throw NonConvergence(msg.str(), e.residual());
    }
    problem.apply(states.y[next], states.f[next]);
  }
  return cycles;
}

double residual(const NodeStates& states, std::span<const double> y0, double dt,
                const NodeCorrection* tau) {
  const QuadratureTable& table = states.table;
  const std::size_t n = y0.size();
  double worst = 0.0;
  Vector r(n);
  for (int m = 1; m < table.size(); ++m) {
    const auto mm = static_cast<std::size_t>(m);
    for (std::size_t i = 0; i < n; ++i) r[i] = y0[i] - states.y[mm][i];
    for (int j = 0; j < table.size(); ++j) {
      const double w = dt * table.q(m, j);
      if (w == 0.0) continue;
      const Vector& fj = states.f[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < n; ++i) r[i] += w * fj[i];
    }
    if (tau)
      for (std::size_t i = 0; i < n; ++i) r[i] += (*tau)[mm][i];
    worst = std::max(worst, max_norm(r));
  }
  return worst;
}

SdcRun run_sdc(ImplicitProblem& problem, const QuadratureTable& table,
               std::span<const double> u0, double t_end, int steps, double tol, int max_iter,
               bool relative) {
  if (steps < 1) throw Error("need at least one time step");
  if (max_iter < 1) throw Error("need at least one sweep per step");
  const double dt = t_end / steps;
  SdcRun run;
  run.final_value.assign(u0.begin(), u0.end());
  for (int step = 0; step < steps; ++step) {
    const Vector y0 = run.final_value;
    NodeStates states = spread(problem, table, y0);
    const double step_tol = relative ? tol * max_norm(y0) : tol;
    StepRecord rec;
    while (rec.iterations < max_iter) {
      const long cycles = sdc_sweep(states, y0, nullptr, dt, problem);
      ++rec.iterations;
      rec.vcycles.push_back(cycles);
      run.total_vcycles += cycles;
      rec.residuals.push_back(residual(states, y0, dt));
      if (rec.residuals.back() <= step_tol) {
        rec.converged = true;
        break;
      }
    }
    run.final_value = states.end_value();
    run.steps.push_back(std::move(rec));
  }
  return run;
}

}  // namespace ipfasst
