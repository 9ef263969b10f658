#include "rheoshape/fem/mesh_gen.hpp"

#include <cmath>
#include <sstream>

namespace rheoshape {

Triangulation build_reference_mesh(const DomainSpec& spec, double h_target) {
  if (!(h_target > 0.0) || !(h_target < spec.r_min() / 4.0)) {
    std::ostringstream msg;
    msg << "build_reference_mesh: h_target " << h_target << " must lie in (0, r_min/4) = (0, "
        << spec.r_min() / 4.0 << ")";
    throw CertificationError(msg.str());
  }
  const double r_bar = 0.5 * (spec.certificate().min_radius + spec.certificate().max_radius);
  const int rings = std::max(2, static_cast<int>(std::lround(r_bar / h_target)));

  Triangulation tri;
  tri.vertices.push_back(spec.center());
  std::vector<std::vector<int>> ring_ids(rings + 1);
  std::vector<int> ring_counts(rings + 1, 0);
  for (int i = 1; i <= rings; ++i) {
    const double f = static_cast<double>(i) / rings;
    const int n =
        std::max(6, static_cast<int>(std::lround(2.0 * M_PI * r_bar * f / h_target)));
    ring_counts[i] = std::max(n, ring_counts[i - 1]);
    ring_ids[i].resize(ring_counts[i]);
    for (int j = 0; j < ring_counts[i]; ++j) {
      const double theta = 2.0 * M_PI * j / ring_counts[i];
      ring_ids[i][j] = static_cast<int>(tri.vertices.size());
      tri.vertices.push_back(spec.center() +
                             f * spec.radius(theta) * Vec2(std::cos(theta), std::sin(theta)));
    }
  }

  // center fan
  for (int j = 0; j < ring_counts[1]; ++j)
    tri.triangles.push_back({0, ring_ids[1][j], ring_ids[1][(j + 1) % ring_counts[1]]});

  // angle-merged bands
  for (int i = 1; i < rings; ++i) {
    const auto& inner = ring_ids[i];
    const auto& outer = ring_ids[i + 1];
    const int na = ring_counts[i];
    const int nb = ring_counts[i + 1];
    int ia = 0, ib = 0;
    while (ia < na || ib < nb) {
      const double ang_a = 2.0 * M_PI * (ia + 1) / na;
      const double ang_b = 2.0 * M_PI * (ib + 1) / nb;
      if (ib >= nb || (ia < na && ang_a <= ang_b)) {
        tri.triangles.push_back({inner[ia % na], outer[ib % nb], inner[(ia + 1) % na]});
        ++ia;
      } else {
        tri.triangles.push_back({inner[ia % na], outer[ib % nb], outer[(ib + 1) % nb]});
        ++ib;
      }
    }
  }

  // Fix accidental CW triangles produced on strongly varying radii.
  for (auto& t : tri.triangles) {
    if (Triangulation::signed_area(tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]) <
        0.0)
      std::swap(t[1], t[2]);
  }
  tri.finalize();
  return tri;
}

Triangulation build_square_mesh(int n, double length, const Vec2& origin) {
  if (n < 1) throw NumericalError("build_square_mesh: n must be >= 1");
  Triangulation tri;
  const double h = length / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) tri.vertices.push_back(origin + h * Vec2(i, j));
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        tri.triangles.push_back({v00, v10, v11});
        tri.triangles.push_back({v00, v11, v01});
      } else {
        tri.triangles.push_back({v00, v10, v01});
        tri.triangles.push_back({v10, v11, v01});
      }
    }
  }
  tri.finalize();
  return tri;
}

}  // namespace rheoshape
