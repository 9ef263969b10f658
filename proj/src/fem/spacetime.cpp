#include "rheoshape/fem/spacetime.hpp"

namespace rheoshape {

double layer_integrate(const MovingMesh& mm, int layer,
                       const std::function<double(const QuadPoint&)>& integrand) {
  const auto& quad = TriQuadrature::degree4();
  const auto& pos = mm.layer_vertices(layer);
  const double t = mm.layer_time(layer);
  double sum = 0.0;
  for (int tr = 0; tr < mm.topology().triangle_count(); ++tr) {
    const auto& tri = mm.topology().triangles[tr];
    const Vec2& a = pos[tri[0]];
    const Vec2& b = pos[tri[1]];
    const Vec2& c = pos[tri[2]];
    const double area = Triangulation::signed_area(a, b, c);
    for (int qp = 0; qp < TriQuadrature::n; ++qp) {
      const auto& l = quad.bary[qp];
      const QuadPoint point{layer, t, tr, l, l[0] * a + l[1] * b + l[2] * c};
      const double v = integrand(point);
      if (!std::isfinite(v)) throw NumericalError("spacetime_integrate: non-finite integrand");
      sum += quad.weight[qp] * area * v;
    }
  }
  return sum;
}

double spacetime_integrate(const MovingMesh& mm,
                           const std::function<double(const QuadPoint&)>& integrand) {
  const int n = mm.layer_count();
  const double dt = mm.grid().dt();
  double total = 0.0;
  for (int layer = 0; layer < n; ++layer) {
    const double wt = (layer == 0 || layer == n - 1) ? 0.5 * dt : dt;
    total += wt * layer_integrate(mm, layer, integrand);
  }
  return total;
}

}  // namespace rheoshape
