#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rheoshape {

/// Rigorous upper bound for sup_{s in [0,1]} |p(s)| of a polynomial given by
/// monomial coefficients. Dense sampling alone is not a bound, so the sampled
/// maximum is padded with (grid spacing) * sup|p'|, where sup|p'| is bounded by
/// the coefficient sum of the derivative. The result is a guaranteed bound,
/// typically within a few percent of the true supremum.
inline double poly_sup_bound_01(const std::vector<double>& coeffs, int grid = 512) {
  if (coeffs.empty()) return 0.0;
  double deriv_coeff_sum = 0.0;
  for (std::size_t k = 1; k < coeffs.size(); ++k)
    deriv_coeff_sum += static_cast<double>(k) * std::abs(coeffs[k]);
  double sampled = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double s = static_cast<double>(i) / grid;
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) v = v * s + coeffs[k];
    sampled = std::max(sampled, std::abs(v));
  }
  return sampled + deriv_coeff_sum / (2.0 * grid);
}

/// Same bound for a polynomial on [0, L]: rescale to [0,1].
inline double poly_sup_bound(const std::vector<double>& coeffs, double length, int grid = 512) {
  std::vector<double> scaled(coeffs.size());
  double pow_l = 1.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    scaled[k] = coeffs[k] * pow_l;
    pow_l *= length;
  }
  return poly_sup_bound_01(scaled, grid);
}

/// Coefficients of p' given those of p.
inline std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
  std::vector<double> d;
  for (std::size_t k = 1; k < coeffs.size(); ++k) d.push_back(static_cast<double>(k) * coeffs[k]);
  return d;
}

inline double poly_eval(const std::vector<double>& coeffs, double s) {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * s + coeffs[k];
  return v;
}

}  // namespace rheoshape
