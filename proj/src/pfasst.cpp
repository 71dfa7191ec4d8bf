#include "ipfasst/pfasst.hpp"

#include <algorithm>
#include <iomanip>
#include <thread>
#include <tuple>

#include "ipfasst/error.hpp"

namespace ipfasst {

namespace {

/// Channels carrying one level each from rank n-1 to rank n.
struct Link {
  explicit Link(std::size_t levels) : per_level(levels) {}
  std::vector<Channel<LevelMessage>> per_level;
};

class Worker {
 public:
  Worker(RankState& rank, int block, double dt, const PfasstOptions& opt, Link* in,
         Link* out)
      : rank_(rank), block_(block), dt_(dt), opt_(opt), in_(in), out_(out),
        coarse_(rank.levels.size() - 1) {
    pred_active_ = in_ != nullptr;
  }

  void run_predictor() {
    auto receive = [&](Vector& y0) { y0 = pop(coarse_).payload; };
    auto send = [&](const Vector& end) { push(coarse_, 0, end, false); };
    rank_.vcycles += predictor(rank_.levels, rank_.state, dt_, rank_.rank + 1, receive, send);
  }

  bool active() const { return !rank_.converged && rank_.iteration < opt_.max_iter; }

  void iterate() {
    const int k = ++rank_.iteration;
    HierarchyState& st = rank_.state;
    // finer initial values: the predecessor's end values from this same
    // iteration; its level-0 message also carries its convergence flag
    bool pred_converged = !in_;
    const bool receiving = pred_active_;
    if (receiving) {
      for (std::size_t l = 0; l < coarse_; ++l) {
        LevelMessage msg = pop(l);
        if (msg.iteration != k) throw Error("fine message from the wrong iteration");
        if (l == 0) pred_converged = msg.converged;
        st.y0[l] = std::move(msg.payload);
      }
      pred_active_ = !pred_converged;
    } else if (in_) {
      pred_converged = true;  // predecessor froze earlier
    }

    std::vector<long> before(rank_.levels.size());
    for (std::size_t l = 0; l < before.size(); ++l) before[l] = rank_.levels[l].problem().vcycles();

    SweepHooks hooks;
    hooks.before_sweep = [&](std::size_t level, Vector& y0) {
      if (level == coarse_ && receiving) {
        LevelMessage msg = pop(coarse_);
        if (msg.iteration != k) throw Error("coarse message from the wrong iteration");
        y0 = std::move(msg.payload);
      }
    };
    hooks.after_sweep = [&](std::size_t level, const NodeStates& states) {
      if (level == 0) return;
      push(level, k, states.end_value(), false);
      if (opt_.trace) {
        const double res = residual(states, st.y0[level], dt_, &st.tau[level]);
        trace_.push_back({block_, rank_.rank, k, level, res,
                          rank_.levels[level].problem().vcycles() - before[level]});
      }
    };
    rank_.vcycles += mlsdc_iteration(rank_.levels, st, dt_, &hooks);

    const double res = residual(st.fine(), st.y0[0], dt_);
    rank_.residuals.push_back(res);
    if (opt_.trace)
      trace_.push_back({block_, rank_.rank, k, 0, res,
                        rank_.levels[0].problem().vcycles() - before[0]});

    if (res <= opt_.tol && pred_converged) {
      rank_.converged = true;
      rank_.converged_at = k;
    }
    push(0, k, st.fine().end_value(), rank_.converged);

    if (opt_.observer) opt_.observer(block_, rank_);
  }

  std::vector<TraceRow>& trace() { return trace_; }

 private:
  LevelMessage pop(std::size_t level) {
    auto& ch = in_->per_level[level];
    if (opt_.executor == Executor::Threaded) return ch.pop();
    auto msg = ch.try_pop();
    if (!msg) throw Error("serial schedule consumed a message before it was sent");
    return std::move(*msg);
  }

  void push(std::size_t level, int iteration, const Vector& payload, bool converged) {
    if (!out_) return;
    out_->per_level[level].push({rank_.rank, level, iteration, payload, converged});
  }

  RankState& rank_;
  int block_;
  double dt_;
  const PfasstOptions& opt_;
  Link* in_;
  Link* out_;
  std::size_t coarse_;
  bool pred_active_ = false;
  std::vector<TraceRow> trace_;
};

void check_options(const Hierarchy& levels, const PfasstOptions& opt, double t_end) {
  if (levels.size() < 2) throw Error("PFASST needs at least two levels");
  if (opt.ranks < 1 || opt.blocks < 1) throw Error("rank and block counts must be positive");
  if (opt.max_iter < 1) throw Error("need at least one iteration");
  if (!(t_end > 0.0)) throw Error("time interval must be positive");
  validate_hierarchy(levels);
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "block,rank,iter,level,residual,vcycles\n";
  for (const auto& r : rows) {
    out << r.block << ',' << r.rank << ',' << r.iter << ',' << r.level << ','
        << std::setprecision(17) << r.residual << ',' << r.vcycles << '\n';
  }
}

long predictor(Hierarchy& levels, HierarchyState& state, double dt, int sweeps,
               const std::function<void(Vector& y0)>& receive,
               const std::function<void(const Vector& end)>& send) {
  const std::size_t coarse = levels.size() - 1;
  const std::vector<NodeStates> before = state.states;
  long cycles = 0;
  for (int p = 0; p < sweeps; ++p) {
    if (p > 0 && receive) receive(state.y0[coarse]);
    cycles += sdc_sweep(state.states[coarse], state.y0[coarse], nullptr, dt,
                        levels[coarse].problem());
    if (send) send(state.states[coarse].end_value());
  }
  for (std::size_t l = coarse; l-- > 0;) {
    coarse_correction(state.states[l], before[l + 1], state.states[l + 1], levels[l], levels[l + 1]);
    state.y0[l] = state.states[l].y[0];
  }
  return cycles;
}

void predictor(std::vector<RankState>& ranks, double dt) {
  PfasstOptions opt;
  std::vector<std::unique_ptr<Link>> links;
  for (std::size_t n = 1; n < ranks.size(); ++n)
    links.push_back(std::make_unique<Link>(ranks[n].levels.size()));
  for (std::size_t n = 0; n < ranks.size(); ++n) {
    Link* in = n > 0 ? links[n - 1].get() : nullptr;
    Link* out = n + 1 < ranks.size() ? links[n].get() : nullptr;
    Worker(ranks[n], 0, dt, opt, in, out).run_predictor();
  }
}

PfasstRun pfasst_run(const Hierarchy& levels, std::span<const double> u0, double t_end,
                     const PfasstOptions& options) {
  check_options(levels, options, t_end);
  const int P = options.ranks;
  const double dt = t_end / (P * options.blocks);

  PfasstRun run;
  run.final_value.assign(u0.begin(), u0.end());

  for (int block = 0; block < options.blocks; ++block) {
    std::vector<RankState> ranks(static_cast<std::size_t>(P));
    for (int n = 0; n < P; ++n) {
      RankState& r = ranks[static_cast<std::size_t>(n)];
      r.rank = n;
      r.levels = clone_hierarchy(levels);
      r.state = spread_hierarchy(r.levels, run.final_value);
    }
    std::vector<std::unique_ptr<Link>> links;
    for (int n = 1; n < P; ++n) links.push_back(std::make_unique<Link>(levels.size()));
    std::vector<Worker> workers;
    workers.reserve(static_cast<std::size_t>(P));
    for (int n = 0; n < P; ++n) {
      Link* in = n > 0 ? links[static_cast<std::size_t>(n - 1)].get() : nullptr;
      Link* out = n + 1 < P ? links[static_cast<std::size_t>(n)].get() : nullptr;
      workers.emplace_back(ranks[static_cast<std::size_t>(n)], block, dt, options, in, out);
    }

    if (options.executor == Executor::Serial) {
      for (auto& w : workers) w.run_predictor();
      for (int k = 1; k <= options.max_iter; ++k)
        for (auto& w : workers)
          if (w.active()) w.iterate();
    } else {
      std::vector<std::exception_ptr> errors(workers.size());
      std::vector<std::thread> threads;
      threads.reserve(workers.size());
      for (std::size_t n = 0; n < workers.size(); ++n) {
        threads.emplace_back([&, n] {
          try {
            workers[n].run_predictor();
            while (workers[n].active()) workers[n].iterate();
          } catch (...) {
            errors[n] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    std::vector<RankSummary> summary;
    for (auto& r : ranks) {
      summary.push_back({r.iteration, r.converged, r.vcycles, r.residuals});
      run.total_vcycles += r.vcycles;
      run.all_converged = run.all_converged && r.converged;
    }
    run.ranks.push_back(std::move(summary));
    for (auto& w : workers)
      run.trace.insert(run.trace.end(), w.trace().begin(), w.trace().end());
    run.final_value = ranks.back().state.fine().end_value();
  }
  std::stable_sort(run.trace.begin(), run.trace.end(), [](const TraceRow& a, const TraceRow& b) {
    return std::tie(a.block, a.rank, a.iter, a.level) < std::tie(b.block, b.rank, b.iter, b.level);
  });
  return run;
}

MlsdcRun run_mlsdc_with_predictor(Hierarchy& levels, std::span<const double> u0, double t_end,
                                  int steps, double tol, int max_iter) {
  if (steps < 1 || max_iter < 1) throw Error("need at least one step and one iteration");
  const double dt = t_end / steps;
  MlsdcRun run;
  run.final_value.assign(u0.begin(), u0.end());
  for (int step = 0; step < steps; ++step) {
    HierarchyState state = spread_hierarchy(levels, run.final_value);
    run.total_vcycles += predictor(levels, state, dt, 1, nullptr, nullptr);
    StepRecord rec;
    while (rec.iterations < max_iter) {
      const long cycles = mlsdc_iteration(levels, state, dt);
      ++rec.iterations;
      rec.vcycles.push_back(cycles);
      run.total_vcycles += cycles;
      rec.residuals.push_back(residual(state.fine(), state.y0[0], dt));
      if (rec.residuals.back() <= tol) {
        rec.converged = true;
        break;
      }
    }
    run.final_value = state.fine().end_value();
    run.steps.push_back(std::move(rec));
  }
  return run;
}

}  // namespace ipfasst
