#include "ipfasst/hierarchy.hpp"

#include <algorithm>
#include <sstream>

#include "ipfasst/error.hpp"

namespace ipfasst {

namespace {

// Values along one axis on nodes 0..n+1 where nodes 0 and n+1 are the
// Dirichlet boundary.
void interpolate_line(const double* in, std::ptrdiff_t in_stride, int coarse_n, double* out,
                      std::ptrdiff_t out_stride, int order) {
  const int nodes = coarse_n + 1;  // index of the right boundary node
  auto value = [&](int node) {
    return (node <= 0 || node >= nodes) ? 0.0 : in[(node - 1) * in_stride];
  };
  const int fine_n = 2 * coarse_n + 1;
  for (int p = 1; p <= fine_n; ++p) {
    double v;
    if (p % 2 == 0) {
      v = value(p / 2);
    } else {
      const int j = (p - 1) / 2;
      if (order == 2) {
        v = 0.5 * (value(j) + value(j + 1));
      } else {
        const int start = std::clamp(j - 1, 0, nodes - 3);
        const double x = (j + 0.5) - start;
        v = 0.0;
        for (int a = 0; a < 4; ++a) {
          double w = 1.0;
          for (int b = 0; b < 4; ++b)
            if (b != a) w *= (x - b) / double(a - b);
          v += w * value(start + a);
        }
      }
    }
    out[(p - 1) * out_stride] = v;
  }
}

void check_nested(const Level& fine, const Level& coarse) {
  const Grid& fg = fine.grid();
  const Grid& cg = coarse.grid();
  if (fg.dim() != cg.dim() || fg.length() != cg.length() ||
      !(cg.points() == fg.points() || 2 * cg.points() == fg.points()))
    throw Error("coarse level grid is not nested in the fine level grid");
  if (fine.table().substeps() % coarse.table().substeps() != 0)
    throw Error("coarse level nodes are not nested in the fine level nodes");
}

}  // namespace

Level::Level(const LevelSpec& spec, const ProblemSpec& problem)
    : spec_(spec),
      grid_(problem.dim, spec.points, problem.length),
      table_(build_q(spec.substeps)),
      problem_(std::make_unique<HeatProblem>(HeatOperator(grid_, problem.nu, spec.stencil_order),
                                             spec.mg, spec.policy)) {
  if (spec.space_interp_order != 2 && spec.space_interp_order != 4)
    throw Error("spatial interpolation order must be 2 or 4");
}

Level::Level(const Level& other)
    : spec_(other.spec_),
      grid_(other.grid_),
      table_(other.table_),
      problem_(std::make_unique<HeatProblem>(other.problem_->op(), other.spec_.mg,
                                             other.spec_.policy)) {}

bool Level::same_discretization(const Level& other) const {
  return grid_ == other.grid_ && table_.nodes == other.table_.nodes;
}

Hierarchy make_hierarchy(const std::vector<LevelSpec>& specs, const ProblemSpec& problem) {
  Hierarchy levels;
  levels.reserve(specs.size());
  for (const auto& s : specs) levels.emplace_back(s, problem);
  validate_hierarchy(levels);
  return levels;
}

void validate_hierarchy(const Hierarchy& levels) {
  if (levels.empty()) throw Error("hierarchy needs at least one level");
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    check_nested(levels[l], levels[l + 1]);
    if (levels[l + 1].spec().stencil_order > levels[l].spec().stencil_order)
      throw Error("coarse level stencil order exceeds the fine level's");
  }
}

Hierarchy clone_hierarchy(const Hierarchy& levels) {
  Hierarchy out;
  out.reserve(levels.size());
  for (const auto& l : levels) out.push_back(Level(l));
  return out;
}

Vector inject(const Grid& fine, const Grid& coarse, std::span<const double> in) {
  if (in.size() != fine.size()) throw Error("injection input does not match the fine grid");
  if (fine == coarse) return Vector(in.begin(), in.end());
  if (fine.coarsened() != coarse) throw Error("grids are not related by factor-2 coarsening");
  Vector out(coarse.size());
  const auto ce = coarse.extents();
  const auto fs = fine.strides();
  const int dim = fine.dim();
  std::size_t ci = 0;
  for (int k = 0; k < ce[2]; ++k)
    for (int j = 0; j < ce[1]; ++j)
      for (int i = 0; i < ce[0]; ++i, ++ci) {
        const std::ptrdiff_t fi = (2 * i + 1) + (dim > 1 ? (2 * j + 1) * fs[1] : 0) +
                                  (dim > 2 ? (2 * k + 1) * fs[2] : 0);
        out[ci] = in[static_cast<std::size_t>(fi)];
      }
  return out;
}

Vector interpolate(const Grid& coarse, const Grid& fine, std::span<const double> in, int order) {
  if (order != 2 && order != 4) throw Error("interpolation order must be 2 or 4");
  if (in.size() != coarse.size()) throw Error("interpolation input does not match the coarse grid");
  if (fine == coarse) return Vector(in.begin(), in.end());
  if (fine.coarsened() != coarse) throw Error("grids are not related by factor-2 coarsening");

  // One axis at a time: shape goes from coarse extents to fine extents.
  std::array<int, 3> shape = coarse.extents();
  Vector cur(in.begin(), in.end());
  for (int d = 0; d < fine.dim(); ++d) {
    const auto dd = static_cast<std::size_t>(d);
    std::array<int, 3> next_shape = shape;
    next_shape[dd] = 2 * shape[dd] + 1;
    Vector next(static_cast<std::size_t>(next_shape[0]) * next_shape[1] * next_shape[2]);
    const std::array<std::ptrdiff_t, 3> s_in{1, shape[0], std::ptrdiff_t(shape[0]) * shape[1]};
    const std::array<std::ptrdiff_t, 3> s_out{1, next_shape[0],
                                              std::ptrdiff_t(next_shape[0]) * next_shape[1]};
    std::array<int, 3> lines = shape;
    lines[dd] = 1;
    for (int c = 0; c < lines[2]; ++c)
      for (int b = 0; b < lines[1]; ++b)
        for (int a = 0; a < lines[0]; ++a) {
          const std::ptrdiff_t base_in = a * s_in[0] + b * s_in[1] + c * s_in[2];
          const std::ptrdiff_t base_out = a * s_out[0] + b * s_out[1] + c * s_out[2];
          interpolate_line(cur.data() + base_in, s_in[dd], shape[dd], next.data() + base_out,
                           s_out[dd], order);
        }
    cur = std::move(next);
    shape = next_shape;
  }
  return cur;
}

NodeStates restrict_state(const NodeStates& fine, const Level& fine_lvl, Level& coarse_lvl) {
  check_nested(fine_lvl, coarse_lvl);
  const Matrix select = time_restriction(fine_lvl.table().nodes, coarse_lvl.table().nodes);
  NodeStates out{coarse_lvl.table(), {}, {}};
  out.y.reserve(static_cast<std::size_t>(out.size()));
  for (int c = 0; c < out.size(); ++c) {
    Eigen::Index f = 0;
    select.row(c).maxCoeff(&f);
    out.y.push_back(inject(fine_lvl.grid(), coarse_lvl.grid(), fine.y[static_cast<std::size_t>(f)]));
  }
  out.f.assign(out.y.size(), Vector(coarse_lvl.grid().size()));
  refresh(out, coarse_lvl.problem());
  return out;
}

NodeCorrection compute_fas(const NodeStates& fine, const NodeStates& coarse_restricted,
                           const Level& fine_lvl, const Level& coarse_lvl, double dt,
                           const NodeCorrection* fine_tau) {
  check_nested(fine_lvl, coarse_lvl);
  const QuadratureTable& ft = fine_lvl.table();
  const QuadratureTable& ct = coarse_lvl.table();
  const Matrix select = time_restriction(ft.nodes, ct.nodes);
  const std::size_t nf = fine_lvl.grid().size();
  const std::size_t nc = coarse_lvl.grid().size();

  NodeCorrection tau(static_cast<std::size_t>(ct.size()), Vector(nc, 0.0));
  Vector fine_integral(nf);
  Vector coarse_integral(nc);
  for (int c = 1; c < ct.size(); ++c) {
    Eigen::Index m = 0;
    select.row(c).maxCoeff(&m);
    std::fill(fine_integral.begin(), fine_integral.end(), 0.0);
    for (int j = 0; j < ft.size(); ++j) {
      const double w = dt * ft.q(m, j);
      if (w == 0.0) continue;
      const Vector& fj = fine.f[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < nf; ++i) fine_integral[i] += w * fj[i];
    }
    if (fine_tau) {
      const Vector& t = (*fine_tau)[static_cast<std::size_t>(m)];
      for (std::size_t i = 0; i < nf; ++i) fine_integral[i] += t[i];
    }
    std::fill(coarse_integral.begin(), coarse_integral.end(), 0.0);
    for (int j = 0; j < ct.size(); ++j) {
      const double w = dt * ct.q(c, j);
      if (w == 0.0) continue;
      const Vector& fj = coarse_restricted.f[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < nc; ++i) coarse_integral[i] += w * fj[i];
    }
    Vector& out = tau[static_cast<std::size_t>(c)];
    out = inject(fine_lvl.grid(), coarse_lvl.grid(), fine_integral);
    for (std::size_t i = 0; i < nc; ++i) out[i] -= coarse_integral[i];
  }
  return tau;
}

void coarse_correction(NodeStates& fine, const NodeStates& old_restricted,
                       const NodeStates& new_coarse, Level& fine_lvl, const Level& coarse_lvl) {
  check_nested(fine_lvl, coarse_lvl);
  if (old_restricted.size() != new_coarse.size() || new_coarse.size() != coarse_lvl.table().size())
    throw Error("coarse states do not match the coarse level");
  if (fine_lvl.same_discretization(coarse_lvl)) {
    fine.y = new_coarse.y;
    refresh(fine, fine_lvl.problem());
    return;
  }
  const Matrix interp = time_interpolation(coarse_lvl.table().nodes, fine_lvl.table().nodes);
  const std::size_t nc = coarse_lvl.grid().size();
  std::vector<Vector> delta(static_cast<std::size_t>(new_coarse.size()), Vector(nc));
  for (std::size_t c = 0; c < delta.size(); ++c)
    for (std::size_t i = 0; i < nc; ++i) delta[c][i] = new_coarse.y[c][i] - old_restricted.y[c][i];

  Vector in_time(nc);
  for (int m = 0; m < fine.size(); ++m) {
    std::fill(in_time.begin(), in_time.end(), 0.0);
    for (int c = 0; c < new_coarse.size(); ++c) {
      const double w = interp(m, c);
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < nc; ++i) in_time[i] += w * delta[static_cast<std::size_t>(c)][i];
    }
    const Vector up = interpolate(coarse_lvl.grid(), fine_lvl.grid(), in_time, fine_lvl.interp_order());
    Vector& y = fine.y[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += up[i];
  }
  refresh(fine, fine_lvl.problem());
}

HierarchyState spread_hierarchy(Hierarchy& levels, std::span<const double> fine_y0) {
  HierarchyState s;
  Vector y0(fine_y0.begin(), fine_y0.end());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (l > 0) y0 = inject(levels[l - 1].grid(), levels[l].grid(), y0);
    s.states.push_back(spread(levels[l].problem(), levels[l].table(), y0));
    s.y0.push_back(y0);
  }
  s.tau.resize(levels.size());
  return s;
}

long mlsdc_iteration(Hierarchy& levels, HierarchyState& state, double dt, const SweepHooks* hooks) {
  const std::size_t L = levels.size();
  if (state.states.size() != L || state.y0.size() != L) throw Error("hierarchy state mismatch");
  state.tau.resize(L);
  long cycles = 0;

  auto sweep = [&](std::size_t l) {
    if (hooks && hooks->before_sweep) hooks->before_sweep(l, state.y0[l]);
    const NodeCorrection* tau = (l == 0 || state.tau[l].empty()) ? nullptr : &state.tau[l];
    cycles += sdc_sweep(state.states[l], state.y0[l], tau, dt, levels[l].problem());
    if (hooks && hooks->after_sweep) hooks->after_sweep(l, state.states[l]);
  };

  for (std::size_t l = 0; l + 1 < L; ++l) {
    NodeStates& s = state.states[l];
    if (s.y[0] != state.y0[l]) {
      s.y[0] = state.y0[l];
      levels[l].problem().apply(s.y[0], s.f[0]);
    }
  }

  std::vector<NodeStates> restricted;
  restricted.reserve(L);
  for (std::size_t l = 0; l + 1 < L; ++l) {
    NodeStates r = restrict_state(state.states[l], levels[l], levels[l + 1]);
    const NodeCorrection* fine_tau = (l == 0 || state.tau[l].empty()) ? nullptr : &state.tau[l];
    state.tau[l + 1] = compute_fas(state.states[l], r, levels[l], levels[l + 1], dt, fine_tau);
    state.states[l + 1] = r;
    restricted.push_back(std::move(r));
  }
  sweep(L - 1);
  for (std::size_t l = L - 1; l-- > 0;) {
    coarse_correction(state.states[l], restricted[l], state.states[l + 1], levels[l], levels[l + 1]);
    // a changed coarse initial value moves the finer one too
    sweep(l);
  }
  return cycles;
}

MlsdcRun run_mlsdc(Hierarchy& levels, std::span<const double> u0, double t_end, int steps,
                   double tol, int max_iter) {
  if (steps < 1) throw Error("need at least one time step");
  if (max_iter < 1) throw Error("need at least one iteration per step");
  const double dt = t_end / steps;
  MlsdcRun run;
  run.final_value.assign(u0.begin(), u0.end());
  for (int step = 0; step < steps; ++step) {
    HierarchyState state = spread_hierarchy(levels, run.final_value);
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
