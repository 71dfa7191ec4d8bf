#include "ipfasst/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include "ipfasst/analysis.hpp"
#include "ipfasst/error.hpp"

namespace ipfasst {

namespace {

const Cell kEmpty{};

std::string ok_status(bool converged) { return converged ? "ok" : "not_converged"; }

// runs fn(0..count-1) on up to `threads` workers
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int workers = std::min(count, threads);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool has_ode_reference(const ExperimentConfig& cfg) { return cfg.dim == 1 && cfg.stencil[0] == 2; }

struct Reference {
  Vector u0;
  Vector pde;
  Vector ode;  // empty when there is no semi-discrete reference
};

Reference reference(const ExperimentConfig& cfg, int points) {
  Grid g(cfg.dim, points, cfg.length);
  Reference r;
  r.u0 = initial_condition(g, cfg.k).values;
  r.pde = exact_pde(g, cfg.k, cfg.nu, cfg.t_end).values;
  if (has_ode_reference(cfg)) r.ode = exact_ode(HeatOperator(g, cfg.nu, 2), cfg.k, cfg.t_end).values;
  return r;
}

Cell ode_error(const Reference& ref, const Vector& u) {
  if (ref.ode.empty()) return kEmpty;
  return max_abs_diff(u, ref.ode);
}

struct History {
  std::vector<double> ode, pde, res, max_res;  // per iteration of the last rank
  bool converged = true;
  std::vector<RankSummary> last_block;
  long total_vcycles = 0;
  Vector final_value;
  std::vector<TraceRow> trace;
};

// PFASST run recording the last rank of the last block after every iteration
History pfasst_history(const ExperimentConfig& cfg, int points, int nt, int ranks, bool trace = false) {
  const Reference ref = reference(cfg, points);
  Hierarchy levels = make_hierarchy(cfg.level_specs(points), cfg.problem());
  PfasstOptions opt;
  opt.ranks = ranks;
  opt.blocks = nt / ranks;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  opt.executor = cfg.executor;
  opt.trace = trace;

  const int last_block = opt.blocks - 1;
  const auto slots = static_cast<std::size_t>(cfg.max_iter + 1);
  std::vector<std::vector<double>> res(static_cast<std::size_t>(ranks), std::vector<double>(slots, -1.0));
  std::vector<double> ode(slots, 0.0), pde(slots, 0.0);
  opt.observer = [&](int block, const RankState& r) {
    if (block != last_block) return;
    const auto k = static_cast<std::size_t>(r.iteration);
    res[static_cast<std::size_t>(r.rank)][k] = r.residuals.back();
    if (r.rank == ranks - 1) {
      const Vector& u = r.state.fine().end_value();
      pde[k] = max_abs_diff(u, ref.pde);
      if (!ref.ode.empty()) ode[k] = max_abs_diff(u, ref.ode);
    }
  };
  PfasstRun run = pfasst_run(levels, ref.u0, cfg.t_end, opt);

  History h;
  h.converged = run.all_converged;
  h.last_block = run.ranks.back();
  h.total_vcycles = run.total_vcycles;
  h.final_value = run.final_value;
  h.trace = std::move(run.trace);
  const int iters = h.last_block.back().iterations;
  for (int k = 1; k <= iters; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    h.ode.push_back(ref.ode.empty() ? std::numeric_limits<double>::quiet_NaN() : ode[kk]);
    h.pde.push_back(pde[kk]);
    h.res.push_back(res.back()[kk]);
    double worst = 0;
    for (const auto& per_rank : res) {
      // frozen ranks keep their last residual
      double v = -1;
      for (std::size_t j = std::min(kk, slots - 1); j > 0 && v < 0; --j) v = per_rank[j];
      worst = std::max(worst, v);
    }
    h.max_res.push_back(worst);
  }
  return h;
}

Cell maybe(double x) {
  if (std::isnan(x)) return kEmpty;
  return x;
}

Table history_table(const std::string& key, const std::vector<int>& params,
                    const std::vector<History>& runs) {
  Table t;
  t.columns = {key, "iter", "ode_error", "pde_error", "residual", "max_residual", "status"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const History& h = runs[i];
    for (std::size_t k = 0; k < h.pde.size(); ++k)
      t.rows.push_back({static_cast<long long>(params[i]), static_cast<long long>(k + 1), maybe(h.ode[k]),
                        h.pde[k], h.res[k], h.max_res[k], ok_status(h.converged)});
  }
  return t;
}

HeatProblem fine_problem(const ExperimentConfig& cfg, int points) {
  return HeatProblem(HeatOperator(Grid(cfg.dim, points, cfg.length), cfg.nu, cfg.stencil[0]), cfg.mg(),
                     cfg.policy());
}

std::string format_cell(const Cell& c) {
  if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
  if (std::holds_alternative<double>(c)) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(c));
    return std::string(buf, p);
  }
  if (std::holds_alternative<std::string>(c)) {
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  }
  return "";
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double Table::num(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (std::holds_alternative<long long>(c)) return static_cast<double>(std::get<long long>(c));
  if (std::holds_alternative<double>(c)) return std::get<double>(c);
  if (std::holds_alternative<std::string>(c)) return std::stod(std::get<std::string>(c));
  return std::numeric_limits<double>::quiet_NaN();
}

std::string Table::str(std::size_t row, const std::string& name) const {
  return format_cell(rows.at(row).at(column(name)));
}

bool Table::all_ok() const {
  const std::size_t s = column("status");
  return std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return format_cell(r[s]) == "ok"; });
}

void write_csv(std::ostream& out, const Table& table, const ExperimentConfig& cfg) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
  out << "# config";
  for (const auto& [key, value] : config_entries(cfg)) out << ' ' << key << '=' << value;
  out << '\n';
}

Table damping_experiment(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"nodes", "z", "rho", "status"};
  const auto grid = default_damping_grid(cfg.damping_points);
  for (int m : cfg.damping_nodes)
    for (const auto& s : damping_scan(build_q(m), grid))
      t.rows.push_back({static_cast<long long>(m), s.z, s.rho, std::string("ok")});
  return t;
}

Table order_study(const ExperimentConfig& cfg) {
  struct Job {
    int order;
    int nt;
  };
  std::vector<Job> jobs;
  for (int order : cfg.orders)
    for (int p = cfg.nt_min_exp; p <= cfg.nt_max_exp; ++p) jobs.push_back({order, 1 << p});
  const Reference ref = reference(cfg, cfg.nx);
  std::vector<std::vector<Cell>> rows(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    HeatProblem prob = fine_problem(cfg, cfg.nx);
    // the solution decays by orders of magnitude, so an absolute tolerance
    // would either stall early steps or let late-step errors pile up
    SdcRun run = run_sdc(prob, build_q(job.order), ref.u0, cfg.t_end, job.nt, cfg.tol, cfg.max_iter, true);
    double res = 0;
    int iters = 0;
    bool converged = true;
    for (const auto& st : run.steps) {
      res = std::max(res, st.residuals.back());
      iters = std::max(iters, st.iterations);
      converged = converged && st.converged;
    }
    rows[static_cast<std::size_t>(i)] = {static_cast<long long>(job.order), static_cast<long long>(job.nt),
                                         ode_error(ref, run.final_value), max_abs_diff(run.final_value, ref.pde),
                                         res, static_cast<long long>(iters),
                                         static_cast<long long>(run.total_vcycles), ok_status(converged)};
  });
  Table t;
  t.columns = {"order", "nt", "ode_error", "pde_error", "residual", "iterations", "vcycles", "status"};
  t.rows = std::move(rows);
  return t;
}

Table vcycle_study(const ExperimentConfig& cfg) {
  std::vector<History> runs(cfg.vcycle_list.size());
  parallel_for(static_cast<int>(runs.size()), cfg.threads, [&](int i) {
    ExperimentConfig c = cfg;
    c.vcycles = cfg.vcycle_list[static_cast<std::size_t>(i)];
    runs[static_cast<std::size_t>(i)] = pfasst_history(c, c.nx, c.nt, c.ranks);
  });
  return history_table("vcycles_per_solve", cfg.vcycle_list, runs);
}

Table weak_scaling(const ExperimentConfig& cfg) {
  std::vector<History> runs(cfg.sizes.size());
  parallel_for(static_cast<int>(runs.size()), cfg.threads, [&](int i) {
    const int n = cfg.sizes[static_cast<std::size_t>(i)];
    runs[static_cast<std::size_t>(i)] = pfasst_history(cfg, n, n, n);
  });
  return history_table("n", cfg.sizes, runs);
}

Table strong_3d(const ExperimentConfig& cfg) {
  const Reference ref = reference(cfg, cfg.nx);
  History par;
  SdcRun serial;
  parallel_for(2, cfg.threads, [&](int i) {
    if (i == 0) {
      par = pfasst_history(cfg, cfg.nx, cfg.nt, cfg.ranks);
    } else {
      HeatProblem prob = fine_problem(cfg, cfg.nx);
      serial = run_sdc(prob, build_q(cfg.nodes[0]), ref.u0, cfg.t_end, cfg.nt, cfg.tol, cfg.max_iter);
    }
  });

  Table t;
  t.columns = {"variant", "step", "iterations", "vcycles", "residual", "pde_error", "status"};
  const int first = cfg.nt - cfg.ranks;
  for (std::size_t n = 0; n < par.last_block.size(); ++n) {
    const RankSummary& r = par.last_block[n];
    const bool last = n + 1 == par.last_block.size();
    t.rows.push_back({variant_name(cfg.variant), static_cast<long long>(first + static_cast<int>(n)),
                      static_cast<long long>(r.iterations), static_cast<long long>(r.vcycles),
                      r.residuals.back(), last ? Cell(max_abs_diff(par.final_value, ref.pde)) : kEmpty,
                      ok_status(r.converged)});
  }
  const std::string serial_name = cfg.inexact() ? "ISDC" : "SDC";
  for (std::size_t n = 0; n < serial.steps.size(); ++n) {
    const StepRecord& s = serial.steps[n];
    long cycles = 0;
    for (long c : s.vcycles) cycles += c;
    const bool last = n + 1 == serial.steps.size();
    t.rows.push_back({serial_name, static_cast<long long>(n), static_cast<long long>(s.iterations),
                      static_cast<long long>(cycles), s.residuals.back(),
                      last ? Cell(max_abs_diff(serial.final_value, ref.pde)) : kEmpty, ok_status(s.converged)});
  }
  return t;
}

Table single_run(const ExperimentConfig& cfg) {
  const Reference ref = reference(cfg, cfg.nx);
  Table t;
  t.columns = {"step", "iterations", "vcycles", "residual", "ode_error", "pde_error", "status"};
  auto add = [&](int step, int iters, long cycles, double res, bool converged, const Vector* final) {
    t.rows.push_back({static_cast<long long>(step), static_cast<long long>(iters), static_cast<long long>(cycles),
                      res, final ? ode_error(ref, *final) : kEmpty,
                      final ? Cell(max_abs_diff(*final, ref.pde)) : kEmpty, ok_status(converged)});
  };
  auto add_steps = [&](const std::vector<StepRecord>& steps, const Vector& final) {
    for (std::size_t n = 0; n < steps.size(); ++n) {
      long cycles = 0;
      for (long c : steps[n].vcycles) cycles += c;
      add(static_cast<int>(n), steps[n].iterations, cycles, steps[n].residuals.back(), steps[n].converged,
          n + 1 == steps.size() ? &final : nullptr);
    }
  };

  if (!cfg.multilevel()) {
    HeatProblem prob = fine_problem(cfg, cfg.nx);
    SdcRun run = run_sdc(prob, build_q(cfg.nodes[0]), ref.u0, cfg.t_end, cfg.nt, cfg.tol, cfg.max_iter);
    add_steps(run.steps, run.final_value);
  } else if (!cfg.parallel()) {
    Hierarchy levels = make_hierarchy(cfg.level_specs(), cfg.problem());
    MlsdcRun run = run_mlsdc(levels, ref.u0, cfg.t_end, cfg.nt, cfg.tol, cfg.max_iter);
    add_steps(run.steps, run.final_value);
  } else {
    Hierarchy levels = make_hierarchy(cfg.level_specs(), cfg.problem());
    PfasstOptions opt;
    opt.ranks = cfg.ranks;
    opt.blocks = cfg.nt / cfg.ranks;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.executor = cfg.executor;
    opt.trace = !cfg.trace.empty();
    PfasstRun run = pfasst_run(levels, ref.u0, cfg.t_end, opt);
    for (std::size_t b = 0; b < run.ranks.size(); ++b)
      for (std::size_t n = 0; n < run.ranks[b].size(); ++n) {
        const RankSummary& r = run.ranks[b][n];
        const bool last = b + 1 == run.ranks.size() && n + 1 == run.ranks[b].size();
        add(static_cast<int>(b * run.ranks[b].size() + n), r.iterations, r.vcycles, r.residuals.back(),
            r.converged, last ? &run.final_value : nullptr);
      }
    if (opt.trace) {
      std::ofstream out(cfg.trace);
      if (!out) throw IoError("cannot write trace file '" + cfg.trace + "'");
      write_trace_csv(out, run.trace);
      if (!out) throw IoError("failed writing trace file '" + cfg.trace + "'");
    }
  }
  return t;
}

Table run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string& e = cfg.experiment;
  if (e == "damping") return damping_experiment(cfg);
  if (e == "order-study") return order_study(cfg);
  if (e == "vcycle-study") return vcycle_study(cfg);
  if (e == "weak-scaling") return weak_scaling(cfg);
  if (e == "strong-3d") return strong_3d(cfg);
  return single_run(cfg);
}

}  // namespace ipfasst
