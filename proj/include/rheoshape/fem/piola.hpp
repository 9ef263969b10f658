#pragma once

#include <functional>

#include "rheoshape/fem/moving_mesh.hpp"

namespace rheoshape {

/// Divergence-structure-preserving transform between the reference domain and
/// a flow layer:
///   pull-back     (to reference)  x -> det(J) J^{-1} u(phi(t, x)),  J = grad phi(t, x),
///   push-forward  (to the layer)  y -> det(K) K^{-1} w(psi(t, y)),  K = grad psi(t, y),
/// with psi the inverse flow, integrated by reversing the one-step scheme.
/// Point evaluation composes exactly (no intermediate interpolation), so the
/// round trip is the identity up to integrator error. Field application
/// interpolates nodally and carries the usual interpolation error.
class PiolaTransform {
public:
  PiolaTransform(const MovingMesh& mesh);

  using PointField = std::function<Vec2(const Vec2&)>;

  /// (P_phi u)(x) for x in the reference domain; u lives on layer time t.
  Vec2 pull_back_point(double t, const Vec2& x, const PointField& u_on_layer) const;

  /// (P_{phi^{-1}} w)(y) for y in Omega_t; w lives on the reference domain.
  Vec2 push_forward_point(double t, const Vec2& y, const PointField& w_on_reference) const;

  /// Nodal pull-back of a P2 velocity field from the given layer to the
  /// reference mesh.
  Eigen::VectorXd pull_back_field(int layer, const Eigen::VectorXd& layer_coeffs) const;

  /// Nodal push-forward of a reference P2 velocity field to the given layer.
  Eigen::VectorXd push_forward_field(int layer, const Eigen::VectorXd& ref_coeffs) const;

  const MovingMesh& mesh() const { return *mesh_; }

  /// phi(t_layer, .) sampled at the reference P2 nodes.
  const Vec2& node_image(int layer, int node) const { return node_flow_->position(layer, node); }
  const Mat2& node_jacobian(int layer, int node) const {
    return node_flow_->jacobian(layer, node);
  }

private:
  const MovingMesh* mesh_;
  std::unique_ptr<FlowMap> node_flow_;       // forward trajectories of reference P2 nodes
  std::unique_ptr<PointLocator> ref_locator_;
};

/// FE point evaluator for a P2 velocity field on a given vertex configuration.
PiolaTransform::PointField fe_velocity_evaluator(const P2Space& space,
                                                 const std::vector<Vec2>& pos,
                                                 const PointLocator& locator,
                                                 const Eigen::VectorXd& coeffs);

}  // namespace rheoshape
