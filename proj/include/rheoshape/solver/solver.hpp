#pragma once

#include <optional>

#include "rheoshape/fem/assemble.hpp"
#include "rheoshape/fem/moving_mesh.hpp"
#include "rheoshape/rheology/rheology.hpp"

namespace rheoshape {

struct SolverConfig {
  double dt = 0.01;
  int picard_max = 30;
  double picard_tol = 1e-10;
  int seed_id = 0;  // labels the solution-ensemble member
  double dt_ode = 1e-3;
  /// Magnitude of the seeded jitter applied to the first Picard guess when
  /// seed_id != 0 (lets ensemble members explore distinct iteration paths).
  double seed_jitter = 1e-8;
};

/// Initial velocity: u0 = V(0) outside Omega and on its boundary; inside,
/// either u0 = V(0) exactly (match_field, w0 = 0) or V(0) plus a solenoidal
/// bump supported strictly inside Omega. The perturbed datum is corrected to
/// be discretely divergence-free.
struct InitialData {
  enum class Mode { match_field, perturbed };
  Mode mode = Mode::match_field;
  std::vector<VelocityBump> perturbation;
};

struct EnergyRecord {
  double t = 0.0;
  double kinetic = 0.0;        // 1/2 ||w||^2_{L2(Omega_t)}
  double diss_q = 0.0;         // int |Dw|^q
  double diss_p = 0.0;         // (1/M) int |Dw|^p
  double scheme_dissipation = 0.0;   // int nu_eff Dw : Dw
  double convective_exchange = 0.0;  // int (w_g . grad(w + V)) . w
  double work_force = 0.0;           // int (f - d_t V - V.grad V) . w
  double viscous_lift = 0.0;         // int nu_eff DV : Dw
  double mesh_work = 0.0;            // geometry change of the old kinetic term
  double numerical_diss = 0.0;       // (1/(2 dt)) ||w - w_old||^2
  double balance_residual = 0.0;     // defect of the discrete energy identity
};

struct EnergyLedger {
  std::vector<EnergyRecord> rows;  // one per time step
  double max_kinetic() const;
  double total_q_dissipation(double dt) const;
  double total_p_dissipation(double dt) const;
  /// max over steps of |residual| / max(1, diss * dt).
  double max_relative_residual(double dt) const;
};

struct FlowState {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> w;         // homogenized coefficients per layer
  std::vector<Eigen::VectorXd> velocity;  // u = w + nodal interpolation of V
  std::vector<Eigen::VectorXd> pressure;
  std::vector<double> div_residual;       // discrete residual of the solved unknown
};

struct PicardLog {
  int layer = 0;
  double m = 0.0;
  std::vector<double> residuals;
  bool converged = true;
};

struct ForwardResult {
  FlowState state;
  EnergyLedger ledger;
  std::vector<PicardLog> picard;
  double final_m = std::numeric_limits<double>::infinity();
};

using BodyForce = SpaceTimeField;

/// March the homogenized problem through the continuation schedule. The mesh
/// grid is the solver grid; cfg.dt must match the layer spacing.
ForwardResult solve_forward(const MovingMesh& mesh, const VelocityFieldSpec& field,
                            const RheologyParams& rheology, const InitialData& init,
                            const BodyForce& body_force, const SolverConfig& cfg);

/// Fixed-mesh mode with arbitrary Dirichlet data for manufactured-solution
/// studies. Solves for the full velocity; no admissibility constraints.
struct VerificationProblem {
  const Triangulation* mesh = nullptr;
  TimeGrid grid;
  double q = 2.0;
  double p = 2.5;
  double inv_m = 0.0;
  SpaceTimeField dirichlet;           // g(t, x)
  std::function<Vec2(const Vec2&)> initial;
  BodyForce body_force;
};

FlowState solve_verification(const VerificationProblem& problem, const SolverConfig& cfg);

struct EnsembleMember {
  SolverConfig cfg;
  std::optional<std::vector<double>> m_schedule;  // overrides rheology.m_schedule
};

/// One forward solve per member; failed members are dropped with a warning
/// entry, at least one must survive.
struct EnsembleResult {
  std::vector<ForwardResult> results;
  std::vector<int> member_index;       // surviving member ids
  std::vector<std::string> warnings;
};

EnsembleResult solve_ensemble(const MovingMesh& mesh, const VelocityFieldSpec& field,
                              const RheologyParams& rheology, const InitialData& init,
                              const BodyForce& body_force,
                              const std::vector<EnsembleMember>& members, int threads = 1);

/// Explicit constant of the a-priori energy bound (see energy.cpp for the
/// inequality chain); inputs are the problem data the bound depends on.
struct EnergyBoundInputs {
  double q = 1.5;
  double c0 = 1.0;        // bound on the initial L2 norm over the box
  double f_norm = 0.0;    // ||f||_{L^{q'}} over the hold-all cylinder
  double c_V = 1.0;
  double c_K = std::sqrt(2.0);  // Korn constant (p = 2 stand-in)
  double c_P = 1.0;             // Poincaré constant
  double box_measure = 1.0;
  double cyl_measure = 1.0;
  double horizon = 1.0;
};

double energy_bound_constant(const EnergyBoundInputs& in);

struct EnergyCheckReport {
  double lhs = 0.0;
  double bound = 0.0;
  double max_kinetic = 0.0;
  double diss_q = 0.0;
  double diss_p = 0.0;
  bool passed = false;
};

EnergyCheckReport energy_check(const EnergyLedger& ledger, double dt, double c_bound);

}  // namespace rheoshape
