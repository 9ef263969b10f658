#include "rheoshape/geometry/set_distance.hpp"

#include <cmath>
#include <sstream>

namespace rheoshape {

HausdorffResult hausdorff_distance(const DomainSpec& a, const DomainSpec& b, int grid_n,
                                   int polygon_n) {
  const HoldAll& box = a.hold_all();
  const double dx = box.width() / grid_n;
  const double dy = box.height() / grid_n;
  const double spacing = std::max(dx, dy);
  const double finest = std::min(a.r_min(), b.r_min());
  if (spacing >= finest) {
    std::ostringstream msg;
    msg << "hausdorff_distance: grid spacing " << spacing << " coarser than r_min " << finest;
    throw NumericalError(msg.str());
  }

  const auto pa = a.boundary_polygon(polygon_n);
  const auto pb = b.boundary_polygon(polygon_n);

  // d_H(co A, co B) with complements taken in the closed box. For a point of
  // co A, the distance to co B is zero outside B and the depth inside B
  // otherwise (the nearest complement point lies on the boundary of B because
  // both domains are strictly inside the box).
  double comp = 0.0;
  for (int i = 0; i <= grid_n; ++i) {
    for (int j = 0; j <= grid_n; ++j) {
      const Vec2 p(box.lo.x() + i * dx, box.lo.y() + j * dy);
      const double sa = polygon::signed_distance(pa, p);
      const double sb = polygon::signed_distance(pb, p);
      if (sa >= 0.0 && sb < 0.0) comp = std::max(comp, -sb);
      if (sb >= 0.0 && sa < 0.0) comp = std::max(comp, -sa);
    }
  }

  double bdry = 0.0;
  for (const Vec2& p : pa) bdry = std::max(bdry, polygon::boundary_distance(pb, p));
  for (const Vec2& p : pb) bdry = std::max(bdry, polygon::boundary_distance(pa, p));

  return {comp, bdry, spacing};
}

std::optional<std::vector<Vec2>> interior_set_of_polygon(const std::vector<Vec2>& poly,
                                                         const Vec2& center, double eps) {
  if (polygon::boundary_distance(poly, center) <= eps || !polygon::contains(poly, center))
    return std::nullopt;
  const int n = static_cast<int>(poly.size());
  std::vector<Vec2> inner(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 dir = (poly[i] - center).normalized();
    const double rho_max = (poly[i] - center).norm();
    // Largest rho with dist(center + rho dir, boundary) >= eps; the distance
    // along a ray from a deep interior point is monotone enough for bisection
    // on certified star-shaped domains.
    double lo = 0.0, hi = rho_max;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vec2 p = center + mid * dir;
      const bool ok = polygon::contains(poly, p) && polygon::boundary_distance(poly, p) >= eps;
      (ok ? lo : hi) = mid;
    }
    inner[i] = center + lo * dir;
  }
  return inner;
}

std::optional<std::vector<Vec2>> interior_set(const DomainSpec& spec, double eps, int polygon_n) {
  if (!(eps > 0.0)) throw NumericalError("interior_set: eps must be positive");
  return interior_set_of_polygon(spec.boundary_polygon(polygon_n), spec.center(), eps);
}

}  // namespace rheoshape
