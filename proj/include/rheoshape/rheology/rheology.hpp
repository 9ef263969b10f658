#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rheoshape/core/types.hpp"

namespace rheoshape {

/// Exponents of the constitutive law and its augmented approximation.
/// q in (6/5, 2] where q = 2 is admitted as the Newtonian verification limit;
/// p >= max(2, (5q/6)') with s' = s/(s-1); the continuation schedule
/// M_1 < ... < M_L is strictly increasing with entries >= 1 (empty schedule
/// disables the augmentation).
struct RheologyParams {
  double q = 1.5;
  double p = 5.0;
  std::vector<double> m_schedule;

  RheologyParams() = default;
  RheologyParams(double q_, double p_, std::vector<double> m_schedule_);

  double q_conj() const { return q / (q - 1.0); }
  static double conjugate(double s) { return s / (s - 1.0); }
  /// Lower admissible p for a given q.
  static double p_floor(double q) { return std::max(2.0, conjugate(5.0 * q / 6.0)); }
};

/// Parameters of the pointwise damage index h = c_h |S|^alpha t^beta together
/// with the integrability exponent r of the associated cost. Validity:
/// alpha <= q' and 1 <= r <= q'/alpha for the active rheology.
struct HemolysisParams {
  double c_h;
  double alpha;
  double beta;
  double r;

  HemolysisParams(double c_h_, double alpha_, double beta_, double r_,
                  const RheologyParams& rp);

  /// [1, q'/alpha], the admissible r-window for given alpha.
  static std::pair<double, double> r_window(const RheologyParams& rp, double alpha);
};

/// Effective viscosity (1 + d)^(q-2) at strain magnitude d.
inline double power_law_viscosity(double d, double q) { return std::pow(1.0 + d, q - 2.0); }

/// S(A) = (1 + |A|)^(q-2) A for a symmetric tensor, Frobenius norm.
Eigen::MatrixXd stress(const Eigen::MatrixXd& a, const RheologyParams& params);

/// S(A) + (1/m) (1 + |A|)^(p-2) A. m = +inf reproduces stress().
Eigen::MatrixXd stress_regularized(const Eigen::MatrixXd& a, const RheologyParams& params,
                                   double m);

/// Fast 2x2 path used by the assembler; assumes a symmetric.
inline Mat2 stress2(const Mat2& a, double q) { return power_law_viscosity(a.norm(), q) * a; }

inline double hemolysis_index(const Eigen::MatrixXd& stress_value, double t,
                              const HemolysisParams& hp) {
  if (t < 0.0) throw NumericalError("hemolysis_index: negative time");
  return hp.c_h * std::pow(stress_value.norm(), hp.alpha) * std::pow(t, hp.beta);
}

inline double hemolysis_index(double stress_norm, double t, const HemolysisParams& hp) {
  if (t < 0.0) throw NumericalError("hemolysis_index: negative time");
  return hp.c_h * std::pow(stress_norm, hp.alpha) * std::pow(t, hp.beta);
}

/// Certificate for the structural inequalities of the law over seeded random
/// symmetric tensors with |A| <= 1e3:
///   coercivity    S(A):A >= c1 |A|^q - c2       with c1 = c2 = 2^(q-2),
///   growth        |S(A)| <= c3 (1 + |A|^(q-1))  with c3 = 1,
///   monotonicity  (S(A)-S(B)):(A-B) > 0 for A != B.
/// The constants are derived (see docs/constitutive_law.md); this check is
/// the numerical oracle for that derivation.
struct InequalityCertificate {
  int dim = 2;
  double q = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  double c1 = 0.0, c2 = 0.0, c3 = 1.0;
  double coercivity_margin = 0.0;    // min of S(A):A - (c1|A|^q - c2)
  double growth_margin = 0.0;        // min of c3(1+|A|^(q-1)) - |S(A)|
  double monotonicity_min = 0.0;     // min of (S(A)-S(B)):(A-B) over A != B
  bool passed = false;
  /// Witness pair of the first violation, row-major entries, empty if passed.
  std::vector<double> witness_a, witness_b;
};

InequalityCertificate certify_inequalities(const RheologyParams& params, long samples,
                                           std::uint64_t seed, int dim = 2);

}  // namespace rheoshape
