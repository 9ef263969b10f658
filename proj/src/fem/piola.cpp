#include "rheoshape/fem/piola.hpp"

#include <sstream>

namespace rheoshape {

PiolaTransform::PiolaTransform(const MovingMesh& mesh) : mesh_(&mesh) {
  std::vector<double> times(mesh.layer_count());
  for (int i = 0; i < mesh.layer_count(); ++i) times[i] = mesh.layer_time(i);
  HoldAll box(Vec2(-1e30, -1e30), Vec2(1e30, 1e30), std::max(times.back(), 1.0));
  node_flow_ = std::make_unique<FlowMap>(mesh.field(), mesh.layer_nodes(0), times,
                                         mesh.dt_ode(), box);
  ref_locator_ = std::make_unique<PointLocator>(mesh.topology(), mesh.layer_vertices(0));
}

Vec2 PiolaTransform::pull_back_point(double t, const Vec2& x, const PointField& u) const {
  auto [y, jac] = FlowMap::evaluate(mesh_->field(), t, x, mesh_->dt_ode());
  return jac.determinant() * jac.inverse() * u(y);
}

Vec2 PiolaTransform::push_forward_point(double t, const Vec2& y, const PointField& w) const {
  auto [x, jac_inv] = FlowMap::evaluate_inverse(mesh_->field(), t, y, mesh_->dt_ode());
  return jac_inv.determinant() * jac_inv.inverse() * w(x);
}

Eigen::VectorXd PiolaTransform::pull_back_field(int layer, const Eigen::VectorXd& coeffs) const {
  const P2Space& space = mesh_->space();
  if (coeffs.size() != space.velocity_dofs())
    throw NumericalError("PiolaTransform: coefficient size mismatch");
  const auto u = fe_velocity_evaluator(space, mesh_->layer_vertices(layer),
                                       mesh_->layer_locator(layer), coeffs);
  Eigen::VectorXd out(space.velocity_dofs());
  for (int k = 0; k < space.node_count(); ++k) {
    const Mat2& jac = node_flow_->jacobian(layer, k);
    const Vec2 v = jac.determinant() * jac.inverse() * u(node_flow_->position(layer, k));
    out[2 * k] = v.x();
    out[2 * k + 1] = v.y();
  }
  return out;
}

Eigen::VectorXd PiolaTransform::push_forward_field(int layer,
                                                   const Eigen::VectorXd& ref_coeffs) const {
  const P2Space& space = mesh_->space();
  if (ref_coeffs.size() != space.velocity_dofs())
    throw NumericalError("PiolaTransform: coefficient size mismatch");
  const auto w = fe_velocity_evaluator(space, mesh_->layer_vertices(0), *ref_locator_, ref_coeffs);
  const double t = mesh_->layer_time(layer);
  const auto& nodes = mesh_->layer_nodes(layer);
  Eigen::VectorXd out(space.velocity_dofs());
  for (int k = 0; k < space.node_count(); ++k) {
    Vec2 x = nodes[k];
    Mat2 jac_inv = Mat2::Identity();
    FlowMap::advance(mesh_->field(), t, 0.0, mesh_->dt_ode(), x, jac_inv);
    const Vec2 v = jac_inv.determinant() * jac_inv.inverse() * w(x);
    out[2 * k] = v.x();
    out[2 * k + 1] = v.y();
  }
  return out;
}

PiolaTransform::PointField fe_velocity_evaluator(const P2Space& space,
                                                 const std::vector<Vec2>& pos,
                                                 const PointLocator& locator,
                                                 const Eigen::VectorXd& coeffs) {
  return [&space, &pos, &locator, &coeffs](const Vec2& p) -> Vec2 {
    const auto hit = locator.locate(p, 1e-8);
    if (!hit) {
      std::ostringstream msg;
      msg << "fe_velocity_evaluator: point (" << p.x() << ", " << p.y() << ") not in mesh";
      throw NumericalError(msg.str());
    }
    return eval_velocity(space, hit->triangle, hit->bary, pos, coeffs);
  };
}

}  // namespace rheoshape
