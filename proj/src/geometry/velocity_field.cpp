#include "rheoshape/geometry/velocity_field.hpp"

#include <cmath>
#include <sstream>

#include "rheoshape/core/poly_bound.hpp"

namespace rheoshape {

namespace {

// Radial profile B(s) = (1-s)^4 with s = |y|^2/R^2 and its derivatives in s.
inline double B1(double s) { return -4.0 * std::pow(1.0 - s, 3); }
inline double B2(double s) { return 12.0 * sqr(1.0 - s); }

inline double time_poly_eval(const std::vector<double>& c, double tau) {
  return poly_eval(c, tau);
}

// sup_{rho in [0,1]} of the radial envelopes of |grad psi|, |hess psi|_F,
// |third-deriv psi|_F for the unit-amplitude bump of radius R. Rigorous via
// 1D polynomial bounds; derivations:
//   grad:  |B'(s)| 2|y|/R^2                        = (8/R)   rho (1-rho^2)^3
//   hess:  |B''| 4|y|^2/R^4 + |B'| 2 sqrt(2)/R^2   = (48 rho^2 (1-rho^2)^2
//                                                     + 8 sqrt(2) (1-rho^2)^3)/R^2
//   third: |B'''| 8|y|^3/R^6 + |B''| (4/R^4) 2 sqrt(3) |y|
//        = (192 rho^3 (1-rho^2) + 96 sqrt(3) rho (1-rho^2)^2)/R^3
struct BumpEnvelopes {
  double e1, e2, e3;
};

BumpEnvelopes bump_envelopes(double R) {
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  // coefficients in rho
  std::vector<double> g1 = {0, 8, 0, -24, 0, 24, 0, -8};
  std::vector<double> g2 = {8 * s2, 0, 48 - 24 * s2, 0, -96 + 24 * s2, 0, 48 - 8 * s2};
  std::vector<double> g3 = {0, 96 * s3, 0, 192 - 192 * s3, 0, -192 + 96 * s3};
  return {poly_sup_bound_01(g1) / R, poly_sup_bound_01(g2) / (R * R),
          poly_sup_bound_01(g3) / (R * R * R)};
}

}  // namespace

VelocityFieldSpec::VelocityFieldSpec(std::vector<VelocityBump> bumps, double c_v,
                                     const HoldAll& hold_all)
    : bumps_(std::move(bumps)), c_v_(c_v), horizon_(hold_all.horizon) {
  if (!(c_v > 0.0)) throw CertificationError("VelocityFieldSpec: c_v must be positive");
  double margin = 1e300;
  for (const auto& b : bumps_) {
    if (!(b.radius > 0.0)) throw CertificationError("VelocityFieldSpec: bump radius <= 0");
    margin = std::min(margin, hold_all.boundary_distance(b.center) - b.radius);
  }
  if (!bumps_.empty() && !(margin > 0.0)) {
    std::ostringstream msg;
    msg << "VelocityFieldSpec: bump support reaches the hold-all boundary (margin " << margin
        << ")";
    throw CertificationError(msg.str());
  }
  const double bound = c11_norm_bound(bumps_, horizon_);
  if (bound > c_v_) {
    std::ostringstream msg;
    msg << "VelocityFieldSpec: certified C^{1,1} bound " << bound << " exceeds c_v " << c_v_;
    throw CertificationError(msg.str());
  }
  cert_ = Certificate{bound, bumps_.empty() ? hold_all.boundary_distance(
                                                  0.5 * (hold_all.lo + hold_all.hi))
                                            : margin};
}

double VelocityFieldSpec::violation(const std::vector<VelocityBump>& bumps, double c_v,
                                    const HoldAll& hold_all) {
  if (!(c_v > 0.0)) return 1e6;
  double v = 0.0;
  for (const auto& b : bumps) {
    if (!(b.radius > 0.0)) return 1e6;
    v += std::max(0.0, b.radius - hold_all.boundary_distance(b.center));
  }
  v += std::max(0.0, c11_norm_bound(bumps, hold_all.horizon) - c_v);
  return v;
}

double VelocityFieldSpec::c11_norm_bound(const std::vector<VelocityBump>& bumps, double horizon) {
  double sup_v = 0.0, sup_dt = 0.0, sup_grad = 0.0;
  double sup_dtt = 0.0, sup_dtgrad = 0.0, sup_hess = 0.0;
  for (const auto& b : bumps) {
    const BumpEnvelopes e = bump_envelopes(b.radius);
    const double g0 = poly_sup_bound_01(b.time_poly);
    const auto d1 = poly_derivative(b.time_poly);
    const double g1 = poly_sup_bound_01(d1) / horizon;
    const double g2 = poly_sup_bound_01(poly_derivative(d1)) / sqr(horizon);
    sup_v += g0 * e.e1;
    sup_dt += g1 * e.e1;
    sup_grad += g0 * e.e2;
    sup_dtt += g2 * e.e1;
    sup_dtgrad += g1 * e.e2;
    sup_hess += g0 * e.e3;
  }
  // ||V||_{C^{1,1}} = sup|V| + sup|D_{t,x}V| + Lip(D_{t,x}V); the Lipschitz
  // seminorm is bounded by the Frobenius norm of the space-time Hessian,
  // whose mixed block appears twice.
  return sup_v + (sup_dt + sup_grad) + (sup_dtt + std::sqrt(2.0) * sup_dtgrad + sup_hess);
}

Vec2 VelocityFieldSpec::value(double t, const Vec2& x) const {
  Vec2 v = Vec2::Zero();
  const double tau = t / horizon_;
  for (const auto& b : bumps_) {
    const Vec2 y = x - b.center;
    const double R2 = sqr(b.radius);
    const double s = y.squaredNorm() / R2;
    if (s >= 1.0) continue;
    const double g = time_poly_eval(b.time_poly, tau);
    const double c = g * B1(s) * 2.0 / R2;
    v += c * Vec2(y.y(), -y.x());
  }
  return v;
}

Mat2 VelocityFieldSpec::gradient(double t, const Vec2& x) const {
  Mat2 gv = Mat2::Zero();
  const double tau = t / horizon_;
  for (const auto& b : bumps_) {
    const Vec2 y = x - b.center;
    const double R2 = sqr(b.radius);
    const double s = y.squaredNorm() / R2;
    if (s >= 1.0) continue;
    const double g = time_poly_eval(b.time_poly, tau);
    // hess(psi)_{ij} = B'' 4 y_i y_j / R^4 + B' 2 delta_ij / R^2
    const double a = B2(s) * 4.0 / sqr(R2);
    const double c = B1(s) * 2.0 / R2;
    Mat2 hess;
    hess << a * y.x() * y.x() + c, a * y.x() * y.y(), a * y.x() * y.y(), a * y.y() * y.y() + c;
    // V = g (d2 psi, -d1 psi): d_j V_1 = g hess_{2j}, d_j V_2 = -g hess_{1j}
    gv.row(0) += g * hess.row(1);
    gv.row(1) -= g * hess.row(0);
  }
  return gv;
}

Vec2 VelocityFieldSpec::time_deriv(double t, const Vec2& x) const {
  Vec2 v = Vec2::Zero();
  const double tau = t / horizon_;
  for (const auto& b : bumps_) {
    const Vec2 y = x - b.center;
    const double R2 = sqr(b.radius);
    const double s = y.squaredNorm() / R2;
    if (s >= 1.0) continue;
    const double gp = poly_eval(poly_derivative(b.time_poly), tau) / horizon_;
    const double c = gp * B1(s) * 2.0 / R2;
    v += c * Vec2(y.y(), -y.x());
  }
  return v;
}

double field_distance_c1(const VelocityFieldSpec& a, const VelocityFieldSpec& b,
                         const HoldAll& hold_all, int time_samples, int space_samples) {
  double d = 0.0;
  for (int it = 0; it < time_samples; ++it) {
    const double t = hold_all.horizon * it / (time_samples - 1);
    for (int ix = 0; ix <= space_samples; ++ix) {
      for (int iy = 0; iy <= space_samples; ++iy) {
        const Vec2 x(hold_all.lo.x() + hold_all.width() * ix / space_samples,
                     hold_all.lo.y() + hold_all.height() * iy / space_samples);
        const double local = (a.value(t, x) - b.value(t, x)).norm() +
                             (a.time_deriv(t, x) - b.time_deriv(t, x)).norm() +
                             (a.gradient(t, x) - b.gradient(t, x)).norm();
        if (!std::isfinite(local)) throw NumericalError("field_distance_c1: non-finite sample");
        d = std::max(d, local);
      }
    }
  }
  return d;
}

}  // namespace rheoshape
