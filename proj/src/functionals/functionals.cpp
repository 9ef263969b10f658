#include "rheoshape/functionals/functionals.hpp"

#include <sstream>

namespace rheoshape {

FunctionalWindow validate_functional(const FunctionalSpec& spec, const RheologyParams& rp) {
  FunctionalWindow w;
  switch (spec.kind) {
    case FunctionalKind::hemolysis_r: {
      if (!spec.hemolysis)
        throw CertificationError("validate_functional: hemolysis_r requires hemolysis params");
      const auto& hp = *spec.hemolysis;
      const double qc = rp.q_conj();
      std::ostringstream msg;
      if (!(hp.alpha <= qc)) {
        msg << "validate_functional: alpha <= q' violated (alpha = " << hp.alpha
            << ", q' = " << qc << ")";
        throw CertificationError(msg.str());
      }
      w.lo = 1.0;
      w.hi = qc / hp.alpha;
      if (!(hp.r >= w.lo) || !(hp.r <= w.hi)) {
        msg << "validate_functional: 1 <= r <= q'/alpha violated (r = " << hp.r << ", window ["
            << w.lo << ", " << w.hi << "])";
        throw CertificationError(msg.str());
      }
      return w;
    }
    case FunctionalKind::tracking:
      if (!spec.target)
        throw CertificationError("validate_functional: tracking requires a target field");
      return w;
    case FunctionalKind::dissipation:
      return w;
  }
  throw CertificationError("validate_functional: unknown kind");
}

namespace {

double layer_contribution(const FunctionalSpec& spec, const MovingMesh& mesh,
                          const VelocityFieldSpec& field, const FlowState& state, int layer,
                          const RheologyParams& rp) {
  const P2Space& space = mesh.space();
  const auto& pos = mesh.layer_vertices(layer);
  const Eigen::VectorXd& w = state.w[layer];
  const double t = mesh.layer_time(layer);

  return layer_integrate(mesh, layer, [&](const QuadPoint& qp) {
    const Mat2 grad_w = eval_velocity_gradient(space, qp.tri, qp.bary, pos, w);
    const Mat2 grad_u = grad_w + field.gradient(t, qp.x);
    const Mat2 du = 0.5 * (grad_u + grad_u.transpose());
    switch (spec.kind) {
      case FunctionalKind::hemolysis_r: {
        const double s_norm = power_law_viscosity(du.norm(), rp.q) * du.norm();
        const double h = hemolysis_index(s_norm, t, *spec.hemolysis);
        return std::pow(std::abs(h), spec.hemolysis->r);
      }
      case FunctionalKind::dissipation: {
        const double nu = power_law_viscosity(du.norm(), rp.q);
        return nu * du.squaredNorm();
      }
      case FunctionalKind::tracking: {
        const Vec2 u = eval_velocity(space, qp.tri, qp.bary, pos, w) + field.value(t, qp.x);
        return (u - spec.target(t, qp.x)).squaredNorm();
      }
    }
    return 0.0;
  });
}

}  // namespace

FunctionalValue evaluate_functional(const FunctionalSpec& spec, const MovingMesh& mesh,
                                    const VelocityFieldSpec& field,
                                    const std::vector<const FlowState*>& states,
                                    const RheologyParams& rp) {
  if (states.empty()) throw NumericalError("evaluate_functional: no states");
  validate_functional(spec, rp);

  FunctionalValue out;
  const int layers = mesh.layer_count();
  const double dt = mesh.grid().dt();
  std::vector<std::vector<double>> per_layer(states.size());

  for (std::size_t s = 0; s < states.size(); ++s) {
    if (static_cast<int>(states[s]->w.size()) != layers)
      throw NumericalError("evaluate_functional: state/mesh layer mismatch");
    per_layer[s].resize(layers);
    double total = 0.0;
    for (int l = 0; l < layers; ++l) {
      const double wt = (l == 0 || l == layers - 1) ? 0.5 * dt : dt;
      const double c = wt * layer_contribution(spec, mesh, field, *states[s], l, rp);
      per_layer[s][l] = c;
      total += c;
    }
    if (!(total >= 0.0))
      throw NumericalError("evaluate_functional: nonnegativity violated");
    out.ensemble_values.push_back(total);
  }

  out.min_member = 0;
  for (std::size_t s = 1; s < states.size(); ++s)
    if (out.ensemble_values[s] < out.ensemble_values[out.min_member])
      out.min_member = static_cast<int>(s);
  out.value = out.ensemble_values[out.min_member];
  out.breakdown = per_layer[out.min_member];
  return out;
}

}  // namespace rheoshape
