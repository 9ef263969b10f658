#include <future>
#include <sstream>

#include "rheoshape/analysis/bogovskii.hpp"
#include "rheoshape/solver/solver.hpp"

namespace rheoshape {

namespace {

Eigen::VectorXd interpolate_field(const P2Space& space, const std::vector<Vec2>& nodes, double t,
                                  const VelocityFieldSpec& field) {
  Eigen::VectorXd v(space.velocity_dofs());
  for (int k = 0; k < space.node_count(); ++k) {
    const Vec2 val = field.value(t, nodes[k]);
    v[2 * k] = val.x();
    v[2 * k + 1] = val.y();
  }
  return v;
}

Eigen::VectorXd interpolate_bumps(const P2Space& space, const std::vector<Vec2>& nodes,
                                  const std::vector<VelocityBump>& bumps, double horizon) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(space.velocity_dofs());
  if (bumps.empty()) return v;
  HoldAll wide(Vec2(-1e30, -1e30), Vec2(1e30, 1e30), horizon);
  VelocityFieldSpec probe(bumps, 1e30, wide);
  for (int k = 0; k < space.node_count(); ++k) {
    if (space.node_on_boundary(k)) continue;
    const Vec2 val = probe.value(0.0, nodes[k]);
    v[2 * k] = val.x();
    v[2 * k + 1] = val.y();
  }
  return v;
}

struct StepEnergyInput {
  const P2Space* space;
  const std::vector<Vec2>* pos_new;
  const std::vector<Vec2>* pos_old;
  double t;
  double dt;
  double q, p, inv_m;
  const Eigen::VectorXd* w_new;
  const Eigen::VectorXd* w_old;
  const Eigen::VectorXd* w_guess;  // Picard state the final system was built at
  const VelocityFieldSpec* background;
  const BodyForce* body_force;
};

/// Quadrature route of the discrete energy identity; every term re-evaluated
/// from the fields, independently of the assembled matrices.
EnergyRecord step_energy_record(const StepEnergyInput& in) {
  const auto& quad = TriQuadrature::degree4();
  EnergyRecord rec;
  rec.t = in.t;
  double kin_old_old_geom = 0.0, kin_old_new_geom = 0.0;

  for (int t = 0; t < in.space->tri->triangle_count(); ++t) {
    // old-geometry kinetic term of the previous solution
    {
      const ElementContext ctx = ElementContext::make(*in.space, t, *in.pos_old);
      for (int qp = 0; qp < TriQuadrature::n; ++qp) {
        const double w = quad.weight[qp] * ctx.area;
        Vec2 wo = Vec2::Zero();
        for (int k = 0; k < 6; ++k)
          wo += ctx.basis[qp].n[k] *
                Vec2((*in.w_old)[2 * ctx.nodes[k]], (*in.w_old)[2 * ctx.nodes[k] + 1]);
        kin_old_old_geom += 0.5 * w * wo.squaredNorm();
      }
    }
    const ElementContext ctx = ElementContext::make(*in.space, t, *in.pos_new);
    for (int qp = 0; qp < TriQuadrature::n; ++qp) {
      const double w = quad.weight[qp] * ctx.area;
      const Vec2& x = ctx.x[qp];
      Vec2 wn = Vec2::Zero(), wo = Vec2::Zero(), wg = Vec2::Zero();
      Mat2 gw = Mat2::Zero(), gg = Mat2::Zero();
      for (int k = 0; k < 6; ++k) {
        const int n0 = 2 * ctx.nodes[k];
        const Vec2 cn((*in.w_new)[n0], (*in.w_new)[n0 + 1]);
        const Vec2 co((*in.w_old)[n0], (*in.w_old)[n0 + 1]);
        const Vec2 cg((*in.w_guess)[n0], (*in.w_guess)[n0 + 1]);
        const double ni = ctx.basis[qp].n[k];
        const Vec2& gi = ctx.grad[qp][k];
        wn += ni * cn;
        wo += ni * co;
        wg += ni * cg;
        gw.row(0) += cn.x() * gi.transpose();
        gw.row(1) += cn.y() * gi.transpose();
        gg.row(0) += cg.x() * gi.transpose();
        gg.row(1) += cg.y() * gi.transpose();
      }
      Vec2 v_val = Vec2::Zero(), v_dt = Vec2::Zero();
      Mat2 v_grad = Mat2::Zero();
      if (in.background) {
        v_val = in.background->value(in.t, x);
        v_grad = in.background->gradient(in.t, x);
        v_dt = in.background->time_deriv(in.t, x);
      }
      const Mat2 d_new = 0.5 * (gw + gw.transpose());
      const Mat2 grad_guess_total = gg + v_grad;
      const Mat2 d_guess = 0.5 * (grad_guess_total + grad_guess_total.transpose());
      const Mat2 dv = 0.5 * (v_grad + v_grad.transpose());
      const double dn = d_guess.norm();
      const double nu = power_law_viscosity(dn, in.q) +
                        (in.inv_m > 0.0 ? in.inv_m * power_law_viscosity(dn, in.p) : 0.0);
      Vec2 force = in.body_force && *in.body_force ? (*in.body_force)(in.t, x) : Vec2::Zero();
      if (in.background) force -= v_dt + v_grad * v_val;

      rec.kinetic += 0.5 * w * wn.squaredNorm();
      kin_old_new_geom += 0.5 * w * wo.squaredNorm();
      rec.numerical_diss += 0.5 * w * (wn - wo).squaredNorm() / in.dt;
      rec.diss_q += w * std::pow(d_new.norm(), in.q);
      if (in.inv_m > 0.0) rec.diss_p += in.inv_m * w * std::pow(d_new.norm(), in.p);
      rec.scheme_dissipation += w * nu * d_new.squaredNorm();
      rec.viscous_lift += w * nu * dv.cwiseProduct(d_new).sum();
      rec.convective_exchange += w * ((gw * wg).dot(wn) + (v_grad * wg).dot(wn));
      rec.work_force += w * force.dot(wn);
    }
  }
  rec.mesh_work = kin_old_new_geom - kin_old_old_geom;
  rec.balance_residual =
      (rec.kinetic - kin_old_old_geom - rec.mesh_work) +
      in.dt * (rec.numerical_diss + rec.scheme_dissipation + rec.convective_exchange +
               rec.viscous_lift - rec.work_force);
  return rec;
}

}  // namespace

double EnergyLedger::max_kinetic() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.kinetic);
  return m;
}

double EnergyLedger::total_q_dissipation(double dt) const {
  double s = 0.0;
  for (const auto& r : rows) s += dt * r.diss_q;
  return s;
}

double EnergyLedger::total_p_dissipation(double dt) const {
  double s = 0.0;
  for (const auto& r : rows) s += dt * r.diss_p;
  return s;
}

double EnergyLedger::max_relative_residual(double dt) const {
  double m = 0.0;
  for (const auto& r : rows)
    m = std::max(m, std::abs(r.balance_residual) / std::max(1.0, r.scheme_dissipation * dt));
  return m;
}

ForwardResult solve_forward(const MovingMesh& mesh, const VelocityFieldSpec& field,
                            const RheologyParams& rheology, const InitialData& init,
                            const BodyForce& body_force, const SolverConfig& cfg) {
  const P2Space& space = mesh.space();
  const TimeGrid& grid = mesh.grid();
  if (std::abs(grid.dt() - cfg.dt) > 1e-12 * std::max(1.0, cfg.dt))
    throw NumericalError("solve_forward: cfg.dt does not match the mesh layer spacing");

  // Initial homogenized datum.
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(space.velocity_dofs());
  if (init.mode == InitialData::Mode::perturbed && !init.perturbation.empty()) {
    w0 = interpolate_bumps(space, mesh.layer_nodes(0), init.perturbation, grid.t_end);
    w0 = bogovskii_correct(space, mesh.layer_vertices(0), w0);
  }

  std::vector<double> schedule = rheology.m_schedule;
  if (schedule.empty()) schedule.push_back(std::numeric_limits<double>::infinity());

  ForwardResult out;
  const int layers = grid.layers;
  std::vector<Eigen::VectorXd> w(layers), pressure(layers), prev_m;
  std::vector<double> divres(layers, 0.0);

  for (std::size_t mi = 0; mi < schedule.size(); ++mi) {
    const double m = schedule[mi];
    const double inv_m = std::isfinite(m) ? 1.0 / m : 0.0;
    const bool last_m = (mi + 1 == schedule.size());
    w[0] = w0;
    pressure[0] = Eigen::VectorXd::Zero(space.tri->vertex_count());
    if (last_m) {
      out.ledger.rows.clear();
      out.picard.clear();
    }

    for (int n = 0; n + 1 < layers; ++n) {
      const double t_next = grid.time(n + 1);
      const auto& pos = mesh.layer_vertices(n + 1);
      Eigen::VectorXd guess = prev_m.empty() ? w[n] : prev_m[n + 1];
      if (n == 0 && cfg.seed_id != 0 && cfg.seed_jitter > 0.0) {
        Rng rng(static_cast<std::uint64_t>(cfg.seed_id) * 0x9e3779b97f4a7c15ull + 1);
        for (int k = 0; k < space.node_count(); ++k) {
          if (space.node_on_boundary(k)) continue;
          guess[2 * k] += cfg.seed_jitter * rng.normal();
          guess[2 * k + 1] += cfg.seed_jitter * rng.normal();
        }
      }

      PicardLog log;
      log.layer = n + 1;
      log.m = m;
      SaddleSolution sol;
      Eigen::VectorXd guess_used = guess;
      for (int it = 0; it < cfg.picard_max; ++it) {
        LayerSystemInput in;
        in.space = &space;
        in.pos = &pos;
        in.t = t_next;
        in.dt = cfg.dt;
        in.q = rheology.q;
        in.p = rheology.p;
        in.inv_m = inv_m;
        in.w_guess = &guess;
        in.w_old = &w[n];
        in.background = &field;
        in.body_force = body_force;
        const LayerSystem sys = assemble_weak_form(in);
        try {
          sol = solve_saddle(sys.momentum, sys.divergence, sys.pressure_integral, sys.rhs, space,
                             pos, nullptr);
        } catch (const NumericalError& err) {
          std::ostringstream msg;
          msg << err.what() << " (layer " << n + 1 << ", m = " << m << ", picard iteration "
              << it << ")";
          throw NumericalError(msg.str());
        }
        const double res =
            (sol.velocity - guess).norm() / std::max(sol.velocity.norm(), 1e-14);
        log.residuals.push_back(res);
        guess_used = guess;
        guess = sol.velocity;
        if (res < cfg.picard_tol) break;
      }
      if (!log.residuals.empty() && log.residuals.back() >= cfg.picard_tol) {
        log.converged = false;
        std::ostringstream msg;
        msg << "solve_forward: Picard did not reach tol " << cfg.picard_tol << " at layer "
            << n + 1 << " (m = " << m << "), last residual " << log.residuals.back();
        throw NumericalError(msg.str());
      }

      w[n + 1] = guess;
      pressure[n + 1] = sol.pressure;
      divres[n + 1] = sol.div_residual;

      if (last_m) {
        StepEnergyInput ein;
        ein.space = &space;
        ein.pos_new = &pos;
        ein.pos_old = &mesh.layer_vertices(n);
        ein.t = t_next;
        ein.dt = cfg.dt;
        ein.q = rheology.q;
        ein.p = rheology.p;
        ein.inv_m = inv_m;
        ein.w_new = &w[n + 1];
        ein.w_old = &w[n];
        ein.w_guess = &guess_used;
        ein.background = &field;
        ein.body_force = &body_force;
        out.ledger.rows.push_back(step_energy_record(ein));
        out.picard.push_back(log);
      }
    }
    prev_m = w;
    if (last_m) out.final_m = m;
  }

  out.state.times.resize(layers);
  out.state.w = std::move(w);
  out.state.pressure = std::move(pressure);
  out.state.div_residual = std::move(divres);
  out.state.velocity.resize(layers);
  for (int i = 0; i < layers; ++i) {
    out.state.times[i] = grid.time(i);
    out.state.velocity[i] =
        out.state.w[i] + interpolate_field(space, mesh.layer_nodes(i), grid.time(i), field);
  }
  return out;
}

FlowState solve_verification(const VerificationProblem& problem, const SolverConfig& cfg) {
  const Triangulation& mesh = *problem.mesh;
  P2Space space(mesh);
  const TimeGrid& grid = problem.grid;
  const auto& pos = mesh.vertices;
  const auto nodes = space.node_positions(pos);

  FlowState state;
  state.times.resize(grid.layers);
  state.w.resize(grid.layers);
  state.velocity.resize(grid.layers);
  state.pressure.resize(grid.layers);
  state.div_residual.assign(grid.layers, 0.0);

  Eigen::VectorXd u(space.velocity_dofs());
  for (int k = 0; k < space.node_count(); ++k) {
    const Vec2 val = problem.initial(nodes[k]);
    u[2 * k] = val.x();
    u[2 * k + 1] = val.y();
  }
  state.times[0] = grid.time(0);
  state.w[0] = u;
  state.velocity[0] = u;
  state.pressure[0] = Eigen::VectorXd::Zero(mesh.vertex_count());

  for (int n = 0; n + 1 < grid.layers; ++n) {
    const double t_next = grid.time(n + 1);
    Eigen::VectorXd guess = u;
    SaddleSolution sol;
    bool converged = false;
    for (int it = 0; it < cfg.picard_max; ++it) {
      LayerSystemInput in;
      in.space = &space;
      in.pos = &pos;
      in.t = t_next;
      in.dt = grid.dt();
      in.q = problem.q;
      in.p = problem.p;
      in.inv_m = problem.inv_m;
      in.w_guess = &guess;
      in.w_old = &u;
      in.background = nullptr;
      in.body_force = problem.body_force;
      const LayerSystem sys = assemble_weak_form(in);
      sol = solve_saddle(sys.momentum, sys.divergence, sys.pressure_integral, sys.rhs, space, pos,
                         [&](const Vec2& x) { return problem.dirichlet(t_next, x); });
      const double res = (sol.velocity - guess).norm() / std::max(sol.velocity.norm(), 1e-14);
      guess = sol.velocity;
      if (res < cfg.picard_tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericalError("solve_verification: Picard did not converge at layer " +
                           std::to_string(n + 1));
    u = guess;
    state.times[n + 1] = t_next;
    state.w[n + 1] = u;
    state.velocity[n + 1] = u;
    state.pressure[n + 1] = sol.pressure;
    state.div_residual[n + 1] = sol.div_residual;
  }
  return state;
}

EnsembleResult solve_ensemble(const MovingMesh& mesh, const VelocityFieldSpec& field,
                              const RheologyParams& rheology, const InitialData& init,
                              const BodyForce& body_force,
                              const std::vector<EnsembleMember>& members, int threads) {
  if (members.empty()) throw NumericalError("solve_ensemble: empty ensemble");
  EnsembleResult out;
  std::vector<std::optional<ForwardResult>> results(members.size());
  std::vector<std::string> errors(members.size());

  auto run_member = [&](std::size_t i) {
    RheologyParams rp = rheology;
    if (members[i].m_schedule) rp = RheologyParams(rheology.q, rheology.p, *members[i].m_schedule);
    results[i] = solve_forward(mesh, field, rp, init, body_force, members[i].cfg);
  };

  if (threads > 1) {
    std::vector<std::future<void>> futures;
    for (std::size_t i = 0; i < members.size(); ++i)
      futures.push_back(std::async(std::launch::async, [&, i] {
        try {
          run_member(i);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }));
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t i = 0; i < members.size(); ++i) {
      try {
        run_member(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  }

  for (std::size_t i = 0; i < members.size(); ++i) {
    if (results[i]) {
      out.results.push_back(std::move(*results[i]));
      out.member_index.push_back(static_cast<int>(i));
    } else {
      out.warnings.push_back("ensemble member " + std::to_string(i) + " failed: " + errors[i]);
    }
  }
  if (out.results.empty())
    throw NumericalError("solve_ensemble: all members failed; first error: " + errors[0]);
  return out;
}

}  // namespace rheoshape
