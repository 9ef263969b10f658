#pragma once

#include <memory>
#include <vector>

#include "rheoshape/geometry/domain_spec.hpp"
#include "rheoshape/geometry/flow_map.hpp"

namespace rheoshape {

/// Time-indexed family Omega_t = phi(t, Omega): the initial radial polygon
/// with its boundary samples transported by the flow map, one polygon per
/// layer.
class MovingDomain {
public:
  MovingDomain(DomainSpec initial, const VelocityFieldSpec& field, const TimeGrid& grid,
               double dt_ode, int boundary_samples = 256);

  const DomainSpec& initial() const { return initial_; }
  const VelocityFieldSpec& field() const { return *field_; }
  const TimeGrid& grid() const { return grid_; }
  double dt_ode() const { return dt_ode_; }

  int layer_count() const { return grid_.layers; }
  double layer_time(int i) const { return grid_.time(i); }
  const std::vector<Vec2>& layer_boundary(int i) const { return boundaries_[i]; }

  /// Nearest layer index for a time in [0, T].
  int nearest_layer(double t) const;

  bool contains(int layer, const Vec2& x, double margin = 0.0) const;
  double boundary_distance(int layer, const Vec2& x) const;

private:
  DomainSpec initial_;
  const VelocityFieldSpec* field_;
  TimeGrid grid_;
  double dt_ode_;
  std::vector<std::vector<Vec2>> boundaries_;
};

struct SpaceTimeSample {
  double t;
  Vec2 x;
};

/// True iff every sample lies in Omega_t with distance to the moving boundary
/// of at least `margin`. Samples are matched to the nearest layer.
bool verify_compact_inclusion(const std::vector<SpaceTimeSample>& samples, const MovingDomain& md,
                              double margin);

}  // namespace rheoshape
