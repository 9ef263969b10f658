#include "rheoshape/geometry/domain_spec.hpp"

#include <cmath>
#include <sstream>

namespace rheoshape {

namespace {

struct RadialScan {
  double min_r, max_r, max_lip_ratio, margin;
};

RadialScan scan(const Vec2& center, double r0, const std::vector<double>& ac,
                const std::vector<double>& as, const HoldAll& box, int samples) {
  RadialScan s{1e300, -1e300, 0.0, 1e300};
  for (int i = 0; i < samples; ++i) {
    const double theta = 2.0 * M_PI * i / samples;
    double r = r0, dr = 0.0;
    for (std::size_t j = 0; j < ac.size(); ++j) {
      const double w = (j + 1) * theta;
      r += ac[j] * std::cos(w);
      dr -= ac[j] * (j + 1.0) * std::sin(w);
    }
    for (std::size_t j = 0; j < as.size(); ++j) {
      const double w = (j + 1) * theta;
      r += as[j] * std::sin(w);
      dr += as[j] * (j + 1.0) * std::cos(w);
    }
    s.min_r = std::min(s.min_r, r);
    s.max_r = std::max(s.max_r, r);
    if (r > 0.0) s.max_lip_ratio = std::max(s.max_lip_ratio, std::abs(dr) / r);
    const Vec2 p = center + r * Vec2(std::cos(theta), std::sin(theta));
    s.margin = std::min(s.margin, box.boundary_distance(p));
  }
  return s;
}

}  // namespace

DomainSpec::DomainSpec(const Vec2& center, double r0, std::vector<double> cos_coeffs,
                       std::vector<double> sin_coeffs, double r_min, double r_max,
                       double lip_bound, const HoldAll& hold_all, int samples)
    : center_(center),
      r0_(r0),
      cos_coeffs_(std::move(cos_coeffs)),
      sin_coeffs_(std::move(sin_coeffs)),
      r_min_(r_min),
      r_max_(r_max),
      lip_bound_(lip_bound),
      hold_all_(hold_all) {
  samples = std::max(samples, kMinCertificationSamples);
  if (!(r_min > 0.0)) throw CertificationError("DomainSpec: r_min must be positive");
  if (!(r_max >= r_min)) throw CertificationError("DomainSpec: r_max must be >= r_min");
  if (!(lip_bound > 0.0)) throw CertificationError("DomainSpec: lip_bound must be positive");

  const RadialScan s = scan(center_, r0_, cos_coeffs_, sin_coeffs_, hold_all_, samples);
  std::ostringstream msg;
  if (s.min_r < r_min) {
    msg << "DomainSpec: sampled min radius " << s.min_r << " below r_min " << r_min;
    throw CertificationError(msg.str());
  }
  if (s.max_r > r_max) {
    msg << "DomainSpec: sampled max radius " << s.max_r << " above r_max " << r_max;
    throw CertificationError(msg.str());
  }
  if (s.max_lip_ratio > lip_bound) {
    msg << "DomainSpec: sampled |r'|/r " << s.max_lip_ratio << " exceeds lip_bound " << lip_bound;
    throw CertificationError(msg.str());
  }
  if (!(s.margin > 0.0)) {
    msg << "DomainSpec: boundary touches or leaves the hold-all box (margin " << s.margin << ")";
    throw CertificationError(msg.str());
  }
  cert_ = Certificate{s.min_r, s.max_r, s.max_lip_ratio, s.margin, samples};
}

double DomainSpec::violation(const Vec2& center, double r0, const std::vector<double>& cos_coeffs,
                             const std::vector<double>& sin_coeffs, double r_min, double r_max,
                             double lip_bound, const HoldAll& hold_all, int samples) {
  samples = std::max(samples, kMinCertificationSamples);
  double v = 0.0;
  if (!(r_min > 0.0) || !(r_max >= r_min) || !(lip_bound > 0.0)) return 1e6;
  const RadialScan s = scan(center, r0, cos_coeffs, sin_coeffs, hold_all, samples);
  v += std::max(0.0, r_min - s.min_r);
  v += std::max(0.0, s.max_r - r_max);
  v += std::max(0.0, s.max_lip_ratio - lip_bound);
  v += std::max(0.0, -s.margin);
  return v;
}

double DomainSpec::radius(double theta) const {
  double r = r0_;
  for (std::size_t j = 0; j < cos_coeffs_.size(); ++j) r += cos_coeffs_[j] * std::cos((j + 1) * theta);
  for (std::size_t j = 0; j < sin_coeffs_.size(); ++j) r += sin_coeffs_[j] * std::sin((j + 1) * theta);
  return r;
}

double DomainSpec::radius_deriv(double theta) const {
  double dr = 0.0;
  for (std::size_t j = 0; j < cos_coeffs_.size(); ++j)
    dr -= cos_coeffs_[j] * (j + 1.0) * std::sin((j + 1) * theta);
  for (std::size_t j = 0; j < sin_coeffs_.size(); ++j)
    dr += sin_coeffs_[j] * (j + 1.0) * std::cos((j + 1) * theta);
  return dr;
}

std::vector<Vec2> DomainSpec::boundary_polygon(int n) const {
  std::vector<Vec2> poly(n);
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * M_PI * i / n;
    poly[i] = center_ + radius(theta) * Vec2(std::cos(theta), std::sin(theta));
  }
  return poly;
}

double DomainSpec::polygon_area(int n) const { return polygon::area(boundary_polygon(n)); }

bool DomainSpec::contains(const Vec2& p) const {
  const Vec2 d = p - center_;
  const double rho = d.norm();
  if (rho < 1e-14) return true;
  return rho < radius(std::atan2(d.y(), d.x()));
}

namespace polygon {

double area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

bool contains(const std::vector<Vec2>& poly, const Vec2& p) {
  // Crossing parity.
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

double boundary_distance(const std::vector<Vec2>& poly, const Vec2& p) {
  double d2 = 1e300;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    d2 = std::min(d2, (p - (a + t * ab)).squaredNorm());
  }
  return std::sqrt(d2);
}

double signed_distance(const std::vector<Vec2>& poly, const Vec2& p) {
  const double d = boundary_distance(poly, p);
  return contains(poly, p) ? -d : d;
}

}  // namespace polygon

}  // namespace rheoshape
