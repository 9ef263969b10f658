#include "rheoshape/optimizer/optimizer.hpp"

#include <algorithm>
#include <future>

#include "rheoshape/fem/mesh_gen.hpp"

namespace rheoshape {

std::vector<std::pair<double, double>> ParamLayout::default_bounds() const {
  std::vector<std::pair<double, double>> b;
  b.emplace_back(r_min * 1.15, r_max * 0.85);
  const double four = 0.25 * (r_max - r_min);
  for (int i = 0; i < fourier_cos + fourier_sin; ++i) b.emplace_back(-four, four);
  for (int i = 0; i < bump_count() * time_poly_len; ++i) b.emplace_back(-0.45 * c_v, 0.45 * c_v);
  return b;
}

Decoded decode(const ParamLayout& layout, const Eigen::VectorXd& x, const HoldAll& hold_all) {
  if (x.size() != layout.dimension()) throw NumericalError("decode: dimension mismatch");
  Decoded d;
  const double r0 = x[0];
  std::vector<double> ac(layout.fourier_cos), as(layout.fourier_sin);
  for (int i = 0; i < layout.fourier_cos; ++i) ac[i] = x[1 + i];
  for (int i = 0; i < layout.fourier_sin; ++i) as[i] = x[1 + layout.fourier_cos + i];
  std::vector<VelocityBump> bumps(layout.bump_count());
  int off = 1 + layout.fourier_cos + layout.fourier_sin;
  for (int b = 0; b < layout.bump_count(); ++b) {
    bumps[b].center = layout.bump_centers[b];
    bumps[b].radius = layout.bump_radii[b];
    bumps[b].time_poly.assign(x.data() + off, x.data() + off + layout.time_poly_len);
    off += layout.time_poly_len;
  }

  d.violation = DomainSpec::violation(layout.center, r0, ac, as, layout.r_min, layout.r_max,
                                      layout.lip_bound, hold_all) +
                VelocityFieldSpec::violation(bumps, layout.c_v, hold_all);
  if (d.violation == 0.0) {
    d.domain.emplace(layout.center, r0, ac, as, layout.r_min, layout.r_max, layout.lip_bound,
                     hold_all);
    d.field.emplace(bumps, layout.c_v, hold_all);
  }
  return d;
}

namespace {

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd x,
                                const std::vector<std::pair<double, double>>& bounds) {
  for (int i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], bounds[i].first, bounds[i].second);
  return x;
}

struct Improvement {
  long eval_index;
  double value;
  Eigen::VectorXd x;
};

struct StartResult {
  long evals = 0;
  std::vector<Improvement> improvements;
};

struct Vertex {
  Eigen::VectorXd x;
  double f;
};

/// One start: fresh simplices around seeded points, standard
/// reflect/expand/contract/shrink moves, restart around the incumbent when
/// the simplex collapses, all within a fixed local budget. Fully sequential
/// and self-contained, so the result is independent of scheduling.
StartResult run_start(const Objective& objective,
                      const std::vector<std::pair<double, double>>& bounds,
                      const MinimizeConfig& cfg, int start_index) {
  const int dim = static_cast<int>(bounds.size());
  const long per_start =
      cfg.budget / std::max(1, cfg.starts) + (start_index == 0 ? cfg.budget % std::max(1, cfg.starts) : 0);
  Rng rng(cfg.seed * 6364136223846793005ull + 0x9e3779b9ull * (start_index + 1));

  StartResult res;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;

  auto eval = [&](Eigen::VectorXd x) {
    x = clamp_to_bounds(std::move(x), bounds);
    const double f = objective(x);
    ++res.evals;
    if (f < best) {
      best = f;
      best_x = x;
      res.improvements.push_back({res.evals, f, x});
    }
    return f;
  };

  Eigen::VectorXd x0(dim);
  if (start_index == 0 && cfg.warm_start) {
    x0 = clamp_to_bounds(*cfg.warm_start, bounds);
  } else {
    for (int i = 0; i < dim; ++i)
      x0[i] = bounds[i].first + (bounds[i].second - bounds[i].first) * rng.uniform();
  }

  while (res.evals < per_start) {
    std::vector<Vertex> simplex;
    simplex.push_back({x0, eval(x0)});
    for (int i = 0; i < dim && res.evals < per_start; ++i) {
      Eigen::VectorXd xi = x0;
      const double step = cfg.simplex_scale * (bounds[i].second - bounds[i].first);
      xi[i] = xi[i] + step <= bounds[i].second ? xi[i] + step : xi[i] - step;
      simplex.push_back({xi, eval(xi)});
    }
    if (static_cast<int>(simplex.size()) < dim + 1) break;
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    std::sort(simplex.begin(), simplex.end(), by_value);

    while (res.evals < per_start) {
      double diam = 0.0;
      for (std::size_t i = 1; i < simplex.size(); ++i)
        diam = std::max(diam, (simplex[i].x - simplex[0].x).norm());
      if (diam < cfg.diameter_tol) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < dim; ++i) centroid += simplex[i].x;
      centroid /= dim;
      const Vertex worst = simplex.back();

      const Eigen::VectorXd xr = centroid + (centroid - worst.x);
      const double fr = eval(xr);
      if (fr < simplex[0].f && res.evals < per_start) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst.x);
        const double fe = eval(xe);
        simplex.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      } else if (fr < simplex[dim - 1].f) {
        simplex.back() = Vertex{xr, fr};
      } else if (res.evals < per_start) {
        const bool outside = fr < worst.f;
        const Eigen::VectorXd xc = centroid + 0.5 * ((outside ? xr : worst.x) - centroid);
        const double fc = eval(xc);
        if (fc < std::min(fr, worst.f)) {
          simplex.back() = Vertex{xc, fc};
        } else {
          for (std::size_t i = 1; i < simplex.size() && res.evals < per_start; ++i) {
            simplex[i].x = simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x);
            simplex[i].f = eval(simplex[i].x);
          }
        }
      }
      std::sort(simplex.begin(), simplex.end(), by_value);
    }

    // Restart: jitter around the incumbent.
    x0 = best_x.size() ? best_x : x0;
    for (int i = 0; i < dim; ++i) {
      const double jitter =
          0.5 * cfg.simplex_scale * (bounds[i].second - bounds[i].first) * (rng.uniform() - 0.5);
      x0[i] = std::clamp(x0[i] + jitter, bounds[i].first, bounds[i].second);
    }
  }
  return res;
}

}  // namespace

OptimizerState minimize(const Objective& objective,
                        const std::vector<std::pair<double, double>>& bounds,
                        const MinimizeConfig& cfg, const BestDiagnostics& diag,
                        const Feasibility& feasible) {
  const int dim = static_cast<int>(bounds.size());
  if (cfg.budget < dim + 1)
    throw NumericalError("minimize: evaluation budget below simplex size");
  const int starts = std::max(1, cfg.starts);
  if (cfg.budget / starts < dim + 1)
    throw NumericalError("minimize: budget too small for the requested start count");

  std::vector<StartResult> results(starts);
  if (cfg.threads > 1) {
    std::vector<std::future<StartResult>> futs;
    for (int s = 0; s < starts; ++s)
      futs.push_back(std::async(std::launch::async,
                                [&, s] { return run_start(objective, bounds, cfg, s); }));
    for (int s = 0; s < starts; ++s) results[s] = futs[s].get();
  } else {
    for (int s = 0; s < starts; ++s) results[s] = run_start(objective, bounds, cfg, s);
  }

  // Deterministic merge in start order: the concatenated improvement stream
  // is the minimizing-sequence log.
  OptimizerState state;
  long eval_offset = 0;
  Eigen::VectorXd prev_best;
  for (int s = 0; s < starts; ++s) {
    for (const auto& imp : results[s].improvements) {
      if (imp.value < state.best_value) {
        HistoryRow row;
        row.evaluations = eval_offset + imp.eval_index;
        row.value = imp.value;
        if (diag && prev_best.size() > 0) {
          const auto [dh, dc] = diag(prev_best, imp.x);
          row.hausdorff_to_prev = dh;
          row.c1_to_prev = dc;
        }
        state.history.push_back(row);
        state.best_value = imp.value;
        state.best_x = imp.x;
        state.best_feasible = feasible ? feasible(imp.x) : true;
        prev_best = imp.x;
      }
    }
    eval_offset += results[s].evals;
  }
  state.evaluations = eval_offset;
  if (!state.best_x.size())
    throw NumericalError("minimize: no candidate evaluated within the budget");
  return state;
}

ObjectiveOutcome shape_objective(const ShapeProblem& problem, const Eigen::VectorXd& x,
                                 double best_known) {
  ObjectiveOutcome out;
  Decoded d = decode(problem.layout, x, problem.hold_all);
  if (d.violation > 0.0) {
    const double base = std::isfinite(best_known) ? best_known : 1e6;
    out.value = base + problem.penalty_weight * d.violation;
    out.note = "infeasible";
    return out;
  }
  out.feasible = true;

  if (problem.synthetic == ShapeProblem::Synthetic::disk_radius ||
      problem.synthetic == ShapeProblem::Synthetic::area_tracking) {
    const double area = d.domain->polygon_area(512);
    out.value = problem.synthetic == ShapeProblem::Synthetic::disk_radius
                    ? sqr(area - problem.synthetic_target)
                    : std::abs(area - problem.synthetic_target);
    return out;
  }

  try {
    const Triangulation ref = build_reference_mesh(*d.domain, problem.h_target);
    const TimeGrid grid{0.0, problem.hold_all.horizon, problem.time_layers};
    MovingMesh mesh(ref, *d.field, grid, problem.solver.dt_ode, problem.quality_floor,
                    &problem.hold_all);
    std::vector<EnsembleMember> members(std::max(1, problem.ensemble_size));
    for (std::size_t i = 0; i < members.size(); ++i) {
      members[i].cfg = problem.solver;
      members[i].cfg.dt = grid.dt();
      members[i].cfg.seed_id = static_cast<int>(i);
    }
    const EnsembleResult ens = solve_ensemble(mesh, *d.field, problem.rheology, problem.init,
                                              problem.body_force, members, 1);
    std::vector<const FlowState*> states;
    for (const auto& r : ens.results) states.push_back(&r.state);
    const FunctionalValue v =
        evaluate_functional(problem.functional, mesh, *d.field, states, problem.rheology);
    out.value = v.value;
  } catch (const std::exception& e) {
    out.solver_failed = true;
    out.note = e.what();
    out.value = 1e9;  // large sentinel, never an admissible optimum
  }
  return out;
}

BestDiagnostics shape_diagnostics(const ShapeProblem& problem) {
  return [problem](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Decoded da = decode(problem.layout, a, problem.hold_all);
    const Decoded db = decode(problem.layout, b, problem.hold_all);
    double dh = 0.0, dc = 0.0;
    if (da.domain && db.domain) dh = hausdorff_distance(*da.domain, *db.domain).complementary;
    if (da.field && db.field) dc = field_distance_c1(*da.field, *db.field, problem.hold_all);
    return std::make_pair(dh, dc);
  };
}

}  // namespace rheoshape
