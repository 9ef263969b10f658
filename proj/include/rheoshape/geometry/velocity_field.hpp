#pragma once

#include <vector>

#include "rheoshape/geometry/hold_all.hpp"

namespace rheoshape {

/// One driving mode: the rotated gradient of a compactly supported C^3
/// polynomial bump, modulated by a time polynomial.
///
///   psi_b(x) = (1 - |x-c|^2/R^2)^4   inside the ball, 0 outside,
///   V_b(t,x) = g_b(t) * (d_y psi_b, -d_x psi_b).
///
/// Rotated gradients are pointwise divergence-free and vanish with three
/// derivatives at the support edge, so each mode is C^{2,1} in space.
struct VelocityBump {
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
  /// g_b(t) = sum_k time_poly[k] * (t/T)^k on [0, T].
  std::vector<double> time_poly;
};

/// Admissible solenoidal driving field: a sum of bumps with a certified
/// rigorous upper bound on the C^{1,1}([0,T] x D) norm. The bound (not a
/// sampled estimate) must not exceed c_v, and every bump support must sit
/// strictly inside the hold-all box; otherwise construction fails.
class VelocityFieldSpec {
public:
  struct Certificate {
    double c11_bound = 0.0;
    double support_margin = 0.0;  // min distance of bump supports to the box boundary
  };

  VelocityFieldSpec(std::vector<VelocityBump> bumps, double c_v, const HoldAll& hold_all);

  static VelocityFieldSpec zero(const HoldAll& hold_all) {
    return VelocityFieldSpec({}, 1.0, hold_all);
  }

  static double violation(const std::vector<VelocityBump>& bumps, double c_v,
                          const HoldAll& hold_all);

  Vec2 value(double t, const Vec2& x) const;
  Mat2 gradient(double t, const Vec2& x) const;  // (grad V)_{ij} = d_j V_i
  Vec2 time_deriv(double t, const Vec2& x) const;
  /// V . grad V, used on the right-hand side of the mesh-following momentum
  /// equation.
  Vec2 convective(double t, const Vec2& x) const { return gradient(t, x) * value(t, x); }

  bool is_zero() const { return bumps_.empty(); }
  const std::vector<VelocityBump>& bumps() const { return bumps_; }
  double c_v() const { return c_v_; }
  double horizon() const { return horizon_; }
  const Certificate& certificate() const { return cert_; }

  /// Rigorous C^{1,1} norm bound for arbitrary bump data (the quantity the
  /// certificate compares against c_v).
  static double c11_norm_bound(const std::vector<VelocityBump>& bumps, double horizon);

private:
  std::vector<VelocityBump> bumps_;
  double c_v_;
  double horizon_;
  Certificate cert_;
};

/// Sampled sup of |a-b| + |d_t(a-b)| + |grad(a-b)| over a tensor grid on
/// [0,T] x D. This is the C^1 distance driving the convergence diagnostics.
double field_distance_c1(const VelocityFieldSpec& a, const VelocityFieldSpec& b,
                         const HoldAll& hold_all, int time_samples = 17,
                         int space_samples = 48);

}  // namespace rheoshape
