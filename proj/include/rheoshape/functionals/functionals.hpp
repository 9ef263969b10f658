#pragma once

#include "rheoshape/fem/spacetime.hpp"
#include "rheoshape/rheology/rheology.hpp"
#include "rheoshape/solver/solver.hpp"

namespace rheoshape {

enum class FunctionalKind { hemolysis_r, dissipation, tracking };

/// Cost density integrated over the moving domain. All shipped kinds are
/// pointwise nonnegative (powers of absolute values and squares), so the
/// nonnegativity contract holds by construction and is still asserted on
/// every evaluation. A new kind added here must also be lower semicontinuous
/// along converging domain/field/solution sequences; that obligation rests on
/// its author and cannot be certified numerically.
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::hemolysis_r;
  std::optional<HemolysisParams> hemolysis;
  SpaceTimeField target;  // tracking reference velocity

  static FunctionalSpec hemolysis_of(const HemolysisParams& hp) {
    FunctionalSpec s;
    s.kind = FunctionalKind::hemolysis_r;
    s.hemolysis = hp;
    return s;
  }
};

struct FunctionalValue {
  double value = 0.0;                   // ensemble minimum
  std::vector<double> ensemble_values;  // one per solution
  std::vector<double> breakdown;        // trapezoid-weighted per-layer terms of the minimizer
  int min_member = 0;
};

struct FunctionalWindow {
  double lo = 1.0, hi = 1.0;
};

/// Checks the exponent window of the hemolysis kind (alpha <= q' and
/// 1 <= r <= q'/alpha); returns the computed window. Throws naming the
/// violated inequality otherwise. Non-hemolysis kinds only check parameter
/// completeness.
FunctionalWindow validate_functional(const FunctionalSpec& spec, const RheologyParams& rp);

FunctionalValue evaluate_functional(const FunctionalSpec& spec, const MovingMesh& mesh,
                                    const VelocityFieldSpec& field,
                                    const std::vector<const FlowState*>& states,
                                    const RheologyParams& rp);

}  // namespace rheoshape
