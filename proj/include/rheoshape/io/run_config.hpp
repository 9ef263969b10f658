#pragma once

#include <json.hpp>
#include <string>

#include "rheoshape/optimizer/optimizer.hpp"

namespace rheoshape {

/// Versioned JSON run configuration. Loading validates the schema, builds
/// every certified object once (so inadmissible data fails here, not mid
/// run), and cross-checks the exponent windows.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 1;

  HoldAll hold_all;

  // domain
  Vec2 domain_center{0.0, 0.0};
  double r0 = 1.0;
  std::vector<double> cos_coeffs, sin_coeffs;
  double r_min = 0.4, r_max = 1.6, lip_bound = 0.5;
  int boundary_samples = 256;

  // velocity
  std::vector<VelocityBump> bumps;
  double c_v = 1.0;

  RheologyParams rheology{1.5, 5.0, {}};
  std::optional<HemolysisParams> hemolysis;

  // solver
  double dt = 0.025;
  int picard_max = 40;
  double picard_tol = 1e-10;
  double dt_ode = 1e-3;
  double h_target = 0.12;
  double quality_floor = 0.05;
  int ensemble = 1;

  FunctionalKind functional_kind = FunctionalKind::hemolysis_r;

  InitialData::Mode init_mode = InitialData::Mode::match_field;
  std::vector<VelocityBump> init_perturbation;

  // optimizer
  struct OptimizerSection {
    long budget = 200;
    int starts = 8;
    double simplex_scale = 0.1;
    double penalty_weight = 1e3;
    int fourier_cos = 2;
    int fourier_sin = 2;
    int time_poly_len = 1;
    std::vector<Vec2> bump_centers{{0.0, 0.0}};
    std::vector<double> bump_radii{0.5};
    std::string synthetic = "none";  // none | disk_radius | area_tracking
    double synthetic_target = M_PI;
    int time_layers = 11;
    double h_target = 0.2;
  } optimizer;

  static RunConfig load(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  DomainSpec make_domain() const;
  VelocityFieldSpec make_field() const;
  TimeGrid make_grid() const;
  SolverConfig make_solver_config() const;
  InitialData make_initial() const;
  FunctionalSpec make_functional() const;
  ShapeProblem make_shape_problem() const;

  /// Stable content hash of the canonical serialization.
  std::string config_hash() const;
};

std::string fnv1a_hex(const std::string& data);

}  // namespace rheoshape
