#pragma once

#include "rheoshape/fem/assemble.hpp"

namespace rheoshape {

/// Smallest constant with ||grad v||_{L^p} <= c ||D v||_{L^p} over zero-trace
/// fields. For p = 2 the constant is the square root of the largest
/// generalized eigenvalue of (grad., grad.) against (D., D.), computed by
/// power iteration on the factored pencil. For p != 2 only a sampled lower
/// bound is available (random discrete fields plus the p = 2 eigenfield) and
/// the result is labeled an estimate.
struct KornResult {
  double constant = 0.0;
  bool is_estimate = false;
  /// max over sampled zero-trace fields of
  /// | ||grad v||^2 - 2 ||D v||^2 + ||div v||^2 | / ||grad v||^2,
  /// the p = 2 backbone identity.
  double identity_residual = 0.0;
  /// min over sampled fields of ||D v|| / ||grad v|| (rigid-motion guard).
  double min_sym_fraction = 1.0;
  int iterations = 0;
};

KornResult korn_constant(const Triangulation& mesh, const std::vector<Vec2>& pos, double p,
                         std::uint64_t seed = 7, int power_iterations = 400, int samples = 32);

}  // namespace rheoshape
