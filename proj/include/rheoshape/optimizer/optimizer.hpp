#pragma once

#include <functional>

#include "rheoshape/functionals/functionals.hpp"
#include "rheoshape/geometry/set_distance.hpp"

namespace rheoshape {

/// Fixed template mapping a flat parameter vector to (domain, field):
///   x = [ r0, cos coefficients, sin coefficients, time polynomial per bump ].
/// Bump centers and radii are template data, not optimization variables.
struct ParamLayout {
  int fourier_cos = 2;
  int fourier_sin = 2;
  int time_poly_len = 1;  // coefficients per bump
  std::vector<Vec2> bump_centers;
  std::vector<double> bump_radii;
  Vec2 center{0.0, 0.0};
  double r_min = 0.4, r_max = 1.6, lip_bound = 0.5, c_v = 1.0;

  int bump_count() const { return static_cast<int>(bump_centers.size()); }
  int dimension() const { return 1 + fourier_cos + fourier_sin + bump_count() * time_poly_len; }
  std::vector<std::pair<double, double>> default_bounds() const;
};

struct Decoded {
  std::optional<DomainSpec> domain;
  std::optional<VelocityFieldSpec> field;
  double violation = 0.0;  // 0 iff both certificates hold
};

Decoded decode(const ParamLayout& layout, const Eigen::VectorXd& x, const HoldAll& hold_all);

struct HistoryRow {
  long evaluations = 0;
  double value = 0.0;
  double hausdorff_to_prev = 0.0;  // complementary-Hausdorff distance of best domains
  double c1_to_prev = 0.0;         // C^1 distance of best fields
};

struct OptimizerState {
  Eigen::VectorXd best_x;
  double best_value = std::numeric_limits<double>::infinity();
  bool best_feasible = false;
  std::vector<HistoryRow> history;  // append-only minimizing-sequence log
  long evaluations = 0;
};

struct MinimizeConfig {
  long budget = 200;
  int starts = 8;
  double simplex_scale = 0.1;
  double penalty_weight = 1e3;
  double diameter_tol = 1e-10;
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<Eigen::VectorXd> warm_start;  // e.g. resumed best
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
/// Called when the incumbent improves; returns (Hausdorff, C1) diagnostics
/// against the previous best. May be empty.
using BestDiagnostics =
    std::function<std::pair<double, double>(const Eigen::VectorXd& prev, const Eigen::VectorXd&)>;
/// Feasibility probe used for the admissible-iterate contract.
using Feasibility = std::function<bool(const Eigen::VectorXd&)>;

/// Simplex search with restarts and seeded multistart over box bounds.
/// The evaluation budget is split statically across starts so results are
/// independent of the parallel schedule.
OptimizerState minimize(const Objective& objective, const std::vector<std::pair<double, double>>& bounds,
                        const MinimizeConfig& cfg, const BestDiagnostics& diag = nullptr,
                        const Feasibility& feasible = nullptr);

/// Full shape problem: decode, penalize violations, otherwise build the
/// moving mesh, run the solver ensemble, and evaluate the functional.
/// Synthetic modes replace the solve by a geometric objective for tests and
/// calibration runs.
struct ShapeProblem {
  enum class Synthetic { none, disk_radius, area_tracking };

  ParamLayout layout;
  HoldAll hold_all;
  RheologyParams rheology;
  FunctionalSpec functional;
  InitialData init;
  SolverConfig solver;
  BodyForce body_force;
  double h_target = 0.2;
  int time_layers = 11;
  double quality_floor = 0.05;
  int ensemble_size = 1;
  double penalty_weight = 1e3;
  Synthetic synthetic = Synthetic::none;
  double synthetic_target = M_PI;
};

struct ObjectiveOutcome {
  double value = 0.0;
  bool feasible = false;
  bool solver_failed = false;
  std::string note;
};

ObjectiveOutcome shape_objective(const ShapeProblem& problem, const Eigen::VectorXd& x,
                                 double best_known);

/// Diagnostics callback comparing decoded shapes/fields of two parameter
/// vectors (used for the minimizing-sequence log).
BestDiagnostics shape_diagnostics(const ShapeProblem& problem);

}  // namespace rheoshape
