#include "rheoshape/geometry/moving_domain.hpp"

#include <cmath>

namespace rheoshape {

MovingDomain::MovingDomain(DomainSpec initial, const VelocityFieldSpec& field,
                           const TimeGrid& grid, double dt_ode, int boundary_samples)
    : initial_(std::move(initial)), field_(&field), grid_(grid), dt_ode_(dt_ode) {
  std::vector<double> times(grid.layers);
  for (int i = 0; i < grid.layers; ++i) times[i] = grid.time(i);
  FlowMap flow(field, initial_.boundary_polygon(boundary_samples), times, dt_ode,
               initial_.hold_all());
  boundaries_.resize(grid.layers);
  for (int i = 0; i < grid.layers; ++i) boundaries_[i] = flow.layer_positions(i);
}

int MovingDomain::nearest_layer(double t) const {
  const double pos = (t - grid_.t_begin) / grid_.dt();
  const int i = static_cast<int>(std::lround(pos));
  return std::clamp(i, 0, grid_.layers - 1);
}

bool MovingDomain::contains(int layer, const Vec2& x, double margin) const {
  const auto& poly = boundaries_[layer];
  if (!polygon::contains(poly, x)) return false;
  if (margin <= 0.0) return true;
  return polygon::boundary_distance(poly, x) >= margin;
}

double MovingDomain::boundary_distance(int layer, const Vec2& x) const {
  return polygon::boundary_distance(boundaries_[layer], x);
}

bool verify_compact_inclusion(const std::vector<SpaceTimeSample>& samples, const MovingDomain& md,
                              double margin) {
  for (const auto& s : samples) {
    const int layer = md.nearest_layer(s.t);
    if (!md.contains(layer, s.x, margin)) return false;
  }
  return true;
}

}  // namespace rheoshape
