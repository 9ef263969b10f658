#pragma once

#include "rheoshape/fem/triangulation.hpp"
#include "rheoshape/geometry/domain_spec.hpp"

namespace rheoshape {

/// Deterministic ring triangulation of the radial polygon: concentric copies
/// of the boundary curve with angle-merged bands. Requires h_target < r_min/4.
Triangulation build_reference_mesh(const DomainSpec& spec, double h_target);

/// n x n structured mesh of the square [origin, origin + (length, length)],
/// alternating diagonals.
Triangulation build_square_mesh(int n, double length = 1.0, const Vec2& origin = Vec2(0.0, 0.0));

}  // namespace rheoshape
