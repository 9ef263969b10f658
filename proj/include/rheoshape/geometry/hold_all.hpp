#pragma once

#include "rheoshape/core/types.hpp"

namespace rheoshape {

/// Fixed box D and time horizon T. Every admissible moving domain lives in
/// the cylinder (0,T) x D.
struct HoldAll {
  Vec2 lo{-2.0, -2.0};
  Vec2 hi{2.0, 2.0};
  double horizon = 1.0;

  HoldAll() = default;
  HoldAll(const Vec2& lo_, const Vec2& hi_, double horizon_) : lo(lo_), hi(hi_), horizon(horizon_) {
    if (!(hi.x() > lo.x()) || !(hi.y() > lo.y()))
      throw CertificationError("HoldAll: box side lengths must be positive");
    if (!(horizon > 0.0)) throw CertificationError("HoldAll: horizon must be positive");
  }

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  double area() const { return width() * height(); }
  /// Measure of the space-time cylinder (0,T) x D.
  double cylinder_measure() const { return horizon * area(); }

  bool contains(const Vec2& p, double margin = 0.0) const {
    return p.x() >= lo.x() + margin && p.x() <= hi.x() - margin && p.y() >= lo.y() + margin &&
           p.y() <= hi.y() - margin;
  }

  /// Distance from p to the box boundary (positive inside).
  double boundary_distance(const Vec2& p) const {
    const double dx = std::min(p.x() - lo.x(), hi.x() - p.x());
    const double dy = std::min(p.y() - lo.y(), hi.y() - p.y());
    return std::min(dx, dy);
  }
};

}  // namespace rheoshape
