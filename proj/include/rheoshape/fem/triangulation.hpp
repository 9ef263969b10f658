#pragma once

#include <array>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rheoshape/core/types.hpp"

namespace rheoshape {

/// Conforming triangle mesh. Triangles are CCW; edges are enumerated on
/// construction (local edge k of a triangle connects local vertices k and
/// (k+1)%3, matching the P2 node layout).
struct Triangulation {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> boundary_vertex;

  std::vector<std::array<int, 2>> edges;            // sorted vertex pairs
  std::vector<std::array<int, 3>> triangle_edges;   // edge ids per triangle
  std::vector<char> boundary_edge;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  void finalize();  // builds edges and boundary flags, checks orientation

  static double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }

  double triangle_area(int t) const { return triangle_area(t, vertices); }
  double triangle_area(int t, const std::vector<Vec2>& pos) const {
    const auto& tr = triangles[t];
    return signed_area(pos[tr[0]], pos[tr[1]], pos[tr[2]]);
  }

  /// Radius-ratio quality 2 r_in / r_circ in (0, 1], 1 for equilateral.
  double triangle_quality(int t, const std::vector<Vec2>& pos) const;

  double total_area(const std::vector<Vec2>& pos) const;
  double min_quality(const std::vector<Vec2>& pos) const;
  /// Longest edge over the mesh.
  double mesh_size(const std::vector<Vec2>& pos) const;
};

/// Uniform-grid spatial index over triangles for point location in a given
/// vertex configuration.
class PointLocator {
public:
  PointLocator(const Triangulation& tri, const std::vector<Vec2>& pos);

  struct Hit {
    int triangle;
    Eigen::Vector3d bary;
  };

  /// Containing triangle and barycentric coordinates; tol admits points on
  /// edges and slightly outside (clamped).
  std::optional<Hit> locate(const Vec2& p, double tol = 1e-10) const;

private:
  const Triangulation* tri_;
  const std::vector<Vec2>* pos_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> bins_;
  int bin_of(int ix, int iy) const { return iy * nx_ + ix; }
};

}  // namespace rheoshape
