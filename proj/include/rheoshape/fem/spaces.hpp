#pragma once

#include <array>

#include "rheoshape/fem/triangulation.hpp"

namespace rheoshape {

/// Degree-4 Gauss rule on the triangle, 6 points, barycentric, weights sum
/// to 1 (multiply by element area).
struct TriQuadrature {
  static constexpr int n = 6;
  std::array<Eigen::Vector3d, n> bary;
  std::array<double, n> weight;

  static const TriQuadrature& degree4();
};

/// P2 Lagrange basis on the reference triangle; local nodes 0..2 at vertices,
/// 3..5 at edge midpoints (3 on v0-v1, 4 on v1-v2, 5 on v2-v0).
struct P2Basis {
  std::array<double, 6> n;
  std::array<Eigen::Vector2d, 6> dref;  // gradient wrt (xi, eta)

  static P2Basis at(const Eigen::Vector3d& bary);
};

/// Quadratic vector / linear scalar dof layout over a triangulation.
/// P2 node ids: vertex v -> v, edge e -> vertex_count + e. A velocity vector
/// interleaves components: node k occupies entries (2k, 2k+1).
struct P2Space {
  const Triangulation* tri = nullptr;
  int n_vertex = 0;
  int n_edge = 0;

  explicit P2Space(const Triangulation& t)
      : tri(&t), n_vertex(t.vertex_count()), n_edge(t.edge_count()) {}

  int node_count() const { return n_vertex + n_edge; }
  int velocity_dofs() const { return 2 * node_count(); }

  std::array<int, 6> cell_nodes(int t) const {
    const auto& tr = tri->triangles[t];
    const auto& te = tri->triangle_edges[t];
    return {tr[0], tr[1], tr[2], n_vertex + te[0], n_vertex + te[1], n_vertex + te[2]};
  }

  bool node_on_boundary(int node) const {
    return node < n_vertex ? tri->boundary_vertex[node] != 0
                           : tri->boundary_edge[node - n_vertex] != 0;
  }

  /// Node coordinates for a given vertex configuration (edge nodes at
  /// midpoints of the deformed edge).
  Vec2 node_position(int node, const std::vector<Vec2>& pos) const {
    if (node < n_vertex) return pos[node];
    const auto& e = tri->edges[node - n_vertex];
    return 0.5 * (pos[e[0]] + pos[e[1]]);
  }

  std::vector<Vec2> node_positions(const std::vector<Vec2>& pos) const {
    std::vector<Vec2> out(node_count());
    for (int k = 0; k < node_count(); ++k) out[k] = node_position(k, pos);
    return out;
  }
};

/// Per-element geometry and basis data at the quadrature points.
struct ElementContext {
  int tri_index = 0;
  std::array<int, 6> nodes{};
  double area = 0.0;
  Mat2 inv_jac_t = Mat2::Identity();  // maps reference gradients to physical
  std::array<Vec2, TriQuadrature::n> x;               // physical quad points
  std::array<P2Basis, TriQuadrature::n> basis;        // reference values
  std::array<std::array<Vec2, 6>, TriQuadrature::n> grad;  // physical gradients

  static ElementContext make(const P2Space& space, int t, const std::vector<Vec2>& pos);
};

/// Velocity evaluation from interleaved P2 coefficients.
Vec2 eval_velocity(const P2Space& space, int t, const Eigen::Vector3d& bary,
                   const std::vector<Vec2>& pos, const Eigen::VectorXd& coeffs);
Mat2 eval_velocity_gradient(const P2Space& space, int t, const Eigen::Vector3d& bary,
                            const std::vector<Vec2>& pos, const Eigen::VectorXd& coeffs);
double eval_pressure(const Triangulation& tri, int t, const Eigen::Vector3d& bary,
                     const Eigen::VectorXd& coeffs);

}  // namespace rheoshape
