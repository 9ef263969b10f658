#pragma once

#include <optional>
#include <vector>

#include "rheoshape/geometry/hold_all.hpp"

namespace rheoshape {

/// Star-shaped initial domain with radial Fourier boundary
///   r(theta) = r0 + sum_j (a_j cos(j theta) + b_j sin(j theta)).
///
/// The constructor certifies, on a dense sample of angles:
///   * r(theta) >= r_min > 0,
///   * |r'(theta)| <= lip_bound * r(theta)   (Lipschitz boundary),
///   * r(theta) <= r_max and the closed domain sits strictly inside the
///     hold-all box with positive margin.
/// No DomainSpec exists in memory without this certificate.
class DomainSpec {
public:
  struct Certificate {
    double min_radius = 0.0;
    double max_radius = 0.0;
    double max_lip_ratio = 0.0;  // max |r'| / r over the sample
    double hold_all_margin = 0.0;
    int samples = 0;
  };

  static constexpr int kMinCertificationSamples = 1024;

  DomainSpec(const Vec2& center, double r0, std::vector<double> cos_coeffs,
             std::vector<double> sin_coeffs, double r_min, double r_max, double lip_bound,
             const HoldAll& hold_all, int samples = 2048);

  /// Quantified admissibility violation for the same data: 0 iff a
  /// certified DomainSpec can be constructed. Used by the optimizer penalty.
  static double violation(const Vec2& center, double r0, const std::vector<double>& cos_coeffs,
                          const std::vector<double>& sin_coeffs, double r_min, double r_max,
                          double lip_bound, const HoldAll& hold_all, int samples = 2048);

  double radius(double theta) const;
  double radius_deriv(double theta) const;

  const Vec2& center() const { return center_; }
  double r0() const { return r0_; }
  const std::vector<double>& cos_coeffs() const { return cos_coeffs_; }
  const std::vector<double>& sin_coeffs() const { return sin_coeffs_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  double lip_bound() const { return lip_bound_; }
  const Certificate& certificate() const { return cert_; }
  const HoldAll& hold_all() const { return hold_all_; }

  /// Closed boundary polygon, n vertices at uniform angles, CCW.
  std::vector<Vec2> boundary_polygon(int n) const;

  /// Shoelace area of the n-gon approximation.
  double polygon_area(int n) const;

  bool contains(const Vec2& p) const;

private:
  Vec2 center_;
  double r0_;
  std::vector<double> cos_coeffs_, sin_coeffs_;
  double r_min_, r_max_, lip_bound_;
  HoldAll hold_all_;
  Certificate cert_;
};

/// Polygon utilities shared by the Hausdorff / interior-set machinery.
namespace polygon {

double area(const std::vector<Vec2>& poly);
bool contains(const std::vector<Vec2>& poly, const Vec2& p);
double boundary_distance(const std::vector<Vec2>& poly, const Vec2& p);
/// Signed distance, negative inside.
double signed_distance(const std::vector<Vec2>& poly, const Vec2& p);

}  // namespace polygon

}  // namespace rheoshape
