#include "rheoshape/fem/triangulation.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace rheoshape {

void Triangulation::finalize() {
  for (int t = 0; t < triangle_count(); ++t) {
    if (triangle_area(t) <= 0.0) {
      std::ostringstream msg;
      msg << "Triangulation: non-positive triangle " << t;
      throw NumericalError(msg.str());
    }
  }
  std::map<std::pair<int, int>, int> edge_ids;
  std::map<std::pair<int, int>, int> edge_use;
  edges.clear();
  triangle_edges.assign(triangles.size(), {});
  for (int t = 0; t < triangle_count(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = triangles[t][k];
      const int b = triangles[t][(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) {
        it = edge_ids.emplace(key, static_cast<int>(edges.size())).first;
        edges.push_back({key.first, key.second});
      }
      triangle_edges[t][k] = it->second;
      edge_use[key]++;
    }
  }
  boundary_edge.assign(edges.size(), 0);
  boundary_vertex.assign(vertices.size(), 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto key = std::make_pair(edges[e][0], edges[e][1]);
    if (edge_use[key] == 1) {
      boundary_edge[e] = 1;
      boundary_vertex[edges[e][0]] = 1;
      boundary_vertex[edges[e][1]] = 1;
    }
  }
}

double Triangulation::triangle_quality(int t, const std::vector<Vec2>& pos) const {
  const auto& tr = triangles[t];
  const double a = (pos[tr[1]] - pos[tr[2]]).norm();
  const double b = (pos[tr[2]] - pos[tr[0]]).norm();
  const double c = (pos[tr[0]] - pos[tr[1]]).norm();
  const double area = triangle_area(t, pos);
  if (area <= 0.0) return 0.0;
  const double s = 0.5 * (a + b + c);
  const double r_in = area / s;
  const double r_circ = a * b * c / (4.0 * area);
  return 2.0 * r_in / r_circ;
}

double Triangulation::total_area(const std::vector<Vec2>& pos) const {
  double sum = 0.0;
  for (int t = 0; t < triangle_count(); ++t) sum += triangle_area(t, pos);
  return sum;
}

double Triangulation::min_quality(const std::vector<Vec2>& pos) const {
  double q = 1.0;
  for (int t = 0; t < triangle_count(); ++t) q = std::min(q, triangle_quality(t, pos));
  return q;
}

double Triangulation::mesh_size(const std::vector<Vec2>& pos) const {
  double h = 0.0;
  for (const auto& e : edges) h = std::max(h, (pos[e[0]] - pos[e[1]]).norm());
  return h;
}

PointLocator::PointLocator(const Triangulation& tri, const std::vector<Vec2>& pos)
    : tri_(&tri), pos_(&pos) {
  lo_ = Vec2(1e300, 1e300);
  hi_ = Vec2(-1e300, -1e300);
  for (const Vec2& p : pos) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(tri.triangle_count()))));
  nx_ = ny_ = n;
  bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  const double wx = std::max(hi_.x() - lo_.x(), 1e-300);
  const double wy = std::max(hi_.y() - lo_.y(), 1e-300);
  for (int t = 0; t < tri.triangle_count(); ++t) {
    Vec2 tlo(1e300, 1e300), thi(-1e300, -1e300);
    for (int k = 0; k < 3; ++k) {
      tlo = tlo.cwiseMin(pos[tri.triangles[t][k]]);
      thi = thi.cwiseMax(pos[tri.triangles[t][k]]);
    }
    const int ix0 = std::clamp(static_cast<int>((tlo.x() - lo_.x()) / wx * nx_), 0, nx_ - 1);
    const int ix1 = std::clamp(static_cast<int>((thi.x() - lo_.x()) / wx * nx_), 0, nx_ - 1);
    const int iy0 = std::clamp(static_cast<int>((tlo.y() - lo_.y()) / wy * ny_), 0, ny_ - 1);
    const int iy1 = std::clamp(static_cast<int>((thi.y() - lo_.y()) / wy * ny_), 0, ny_ - 1);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) bins_[bin_of(ix, iy)].push_back(t);
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(const Vec2& p, double tol) const {
  const double wx = std::max(hi_.x() - lo_.x(), 1e-300);
  const double wy = std::max(hi_.y() - lo_.y(), 1e-300);
  const int ix = std::clamp(static_cast<int>((p.x() - lo_.x()) / wx * nx_), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>((p.y() - lo_.y()) / wy * ny_), 0, ny_ - 1);

  auto try_triangle = [&](int t) -> std::optional<Hit> {
    const auto& tr = tri_->triangles[t];
    const Vec2& a = (*pos_)[tr[0]];
    const Vec2& b = (*pos_)[tr[1]];
    const Vec2& c = (*pos_)[tr[2]];
    const double area2 = 2.0 * Triangulation::signed_area(a, b, c);
    if (area2 <= 0.0) return std::nullopt;
    const double l1 = 2.0 * Triangulation::signed_area(a, p, c) / area2;
    const double l2 = 2.0 * Triangulation::signed_area(a, b, p) / area2;
    const double l0 = 1.0 - l1 - l2;
    if (l0 >= -tol && l1 >= -tol && l2 >= -tol)
      return Hit{t, Eigen::Vector3d(l0, l1, l2)};
    return std::nullopt;
  };

  // Expanding ring search keeps the scan local; the full sweep only runs for
  // points at the hull within roundoff of an edge.
  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jx >= nx_ || jy < 0 || jy >= ny_) continue;
        for (int t : bins_[bin_of(jx, jy)])
          if (auto hit = try_triangle(t)) return hit;
      }
    }
    if (ring >= 2) break;  // beyond two rings the point is genuinely outside
  }
  return std::nullopt;
}

}  // namespace rheoshape
