#include "rheoshape/fem/spaces.hpp"

namespace rheoshape {

const TriQuadrature& TriQuadrature::degree4() {
  static const TriQuadrature rule = [] {
    TriQuadrature r;
    const double a = 0.445948490915965;
    const double wa = 0.223381589678011;
    const double b = 0.091576213509771;
    const double wb = 0.109951743655322;
    r.bary = {Eigen::Vector3d(1 - 2 * a, a, a), Eigen::Vector3d(a, 1 - 2 * a, a),
              Eigen::Vector3d(a, a, 1 - 2 * a), Eigen::Vector3d(1 - 2 * b, b, b),
              Eigen::Vector3d(b, 1 - 2 * b, b), Eigen::Vector3d(b, b, 1 - 2 * b)};
    r.weight = {wa, wa, wa, wb, wb, wb};
    return r;
  }();
  return rule;
}

P2Basis P2Basis::at(const Eigen::Vector3d& bary) {
  const double l0 = bary[0], l1 = bary[1], l2 = bary[2];
  P2Basis b;
  b.n = {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
         4 * l0 * l1,       4 * l1 * l2,       4 * l2 * l0};
  b.dref = {Eigen::Vector2d(-(4 * l0 - 1), -(4 * l0 - 1)),
            Eigen::Vector2d(4 * l1 - 1, 0.0),
            Eigen::Vector2d(0.0, 4 * l2 - 1),
            Eigen::Vector2d(4 * (l0 - l1), -4 * l1),
            Eigen::Vector2d(4 * l2, 4 * l1),
            Eigen::Vector2d(-4 * l2, 4 * (l0 - l2))};
  return b;
}

ElementContext ElementContext::make(const P2Space& space, int t, const std::vector<Vec2>& pos) {
  ElementContext ctx;
  ctx.tri_index = t;
  ctx.nodes = space.cell_nodes(t);
  const auto& tr = space.tri->triangles[t];
  const Vec2& a = pos[tr[0]];
  const Vec2& b = pos[tr[1]];
  const Vec2& c = pos[tr[2]];
  Mat2 jac;
  jac.col(0) = b - a;
  jac.col(1) = c - a;
  const double det = jac.determinant();
  ctx.area = 0.5 * det;
  if (!(ctx.area > 0.0)) throw NumericalError("ElementContext: non-positive element");
  ctx.inv_jac_t = jac.inverse().transpose();
  const auto& quad = TriQuadrature::degree4();
  for (int qp = 0; qp < TriQuadrature::n; ++qp) {
    const auto& l = quad.bary[qp];
    ctx.x[qp] = l[0] * a + l[1] * b + l[2] * c;
    ctx.basis[qp] = P2Basis::at(l);
    for (int k = 0; k < 6; ++k) ctx.grad[qp][k] = ctx.inv_jac_t * ctx.basis[qp].dref[k];
  }
  return ctx;
}

Vec2 eval_velocity(const P2Space& space, int t, const Eigen::Vector3d& bary,
                   const std::vector<Vec2>&, const Eigen::VectorXd& coeffs) {
  const auto nodes = space.cell_nodes(t);
  const P2Basis b = P2Basis::at(bary);
  Vec2 v = Vec2::Zero();
  for (int k = 0; k < 6; ++k)
    v += b.n[k] * Vec2(coeffs[2 * nodes[k]], coeffs[2 * nodes[k] + 1]);
  return v;
}

Mat2 eval_velocity_gradient(const P2Space& space, int t, const Eigen::Vector3d& bary,
                            const std::vector<Vec2>& pos, const Eigen::VectorXd& coeffs) {
  const auto nodes = space.cell_nodes(t);
  const auto& tr = space.tri->triangles[t];
  Mat2 jac;
  jac.col(0) = pos[tr[1]] - pos[tr[0]];
  jac.col(1) = pos[tr[2]] - pos[tr[0]];
  const Mat2 inv_jac_t = jac.inverse().transpose();
  const P2Basis b = P2Basis::at(bary);
  Mat2 g = Mat2::Zero();  // g(i,j) = d_j u_i
  for (int k = 0; k < 6; ++k) {
    const Vec2 gk = inv_jac_t * b.dref[k];
    g.row(0) += coeffs[2 * nodes[k]] * gk.transpose();
    g.row(1) += coeffs[2 * nodes[k] + 1] * gk.transpose();
  }
  return g;
}

double eval_pressure(const Triangulation& tri, int t, const Eigen::Vector3d& bary,
                     const Eigen::VectorXd& coeffs) {
  const auto& tr = tri.triangles[t];
  return bary[0] * coeffs[tr[0]] + bary[1] * coeffs[tr[1]] + bary[2] * coeffs[tr[2]];
}

}  // namespace rheoshape
