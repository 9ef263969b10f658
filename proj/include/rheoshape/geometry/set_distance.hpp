#pragma once

#include <optional>
#include <vector>

#include "rheoshape/geometry/domain_spec.hpp"

namespace rheoshape {

struct HausdorffResult {
  /// Hausdorff distance of the complements within the closed hold-all box
  /// (the convention used for the domain-class topology).
  double complementary;
  /// Hausdorff distance of the two boundaries, reported for diagnostics.
  double boundary;
  double grid_spacing;
};

/// Signed-distance-grid evaluation of both Hausdorff conventions. The grid
/// resolution must resolve the thinner domain: spacing above min(r_min)
/// is rejected.
HausdorffResult hausdorff_distance(const DomainSpec& a, const DomainSpec& b, int grid_n = 256,
                                   int polygon_n = 512);

/// Polygonal approximation of the eps-interior { x : dist(x, boundary) > eps },
/// by inward offset along rays from the center. Returns nullopt when the
/// interior is empty at this eps.
std::optional<std::vector<Vec2>> interior_set(const DomainSpec& spec, double eps,
                                              int polygon_n = 512);

/// Same inward offset for a bare polygon with a given star center.
std::optional<std::vector<Vec2>> interior_set_of_polygon(const std::vector<Vec2>& poly,
                                                         const Vec2& center, double eps);

}  // namespace rheoshape
