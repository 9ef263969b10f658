#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>

#include "rheoshape/fem/spaces.hpp"
#include "rheoshape/geometry/velocity_field.hpp"

namespace rheoshape {

using SparseMat = Eigen::SparseMatrix<double>;

/// (u, v) over P2 vector fields.
SparseMat p2_vector_mass(const P2Space& space, const std::vector<Vec2>& pos);
/// (grad u, grad v) over P2 vector fields.
SparseMat p2_vector_laplacian(const P2Space& space, const std::vector<Vec2>& pos);
/// (D u, D v) over P2 vector fields (symmetric gradients).
SparseMat p2_vector_sym_product(const P2Space& space, const std::vector<Vec2>& pos);
/// (div u, div v) over P2 vector fields.
SparseMat p2_vector_div_product(const P2Space& space, const std::vector<Vec2>& pos);
/// Rows P1, columns P2 vector: (q, div u).
SparseMat p2p1_divergence(const P2Space& space, const std::vector<Vec2>& pos);
/// (q, r) over P1.
SparseMat p1_mass(const Triangulation& tri, const std::vector<Vec2>& pos);
/// Entries int q_i dx.
Eigen::VectorXd p1_integrals(const Triangulation& tri, const std::vector<Vec2>& pos);

/// || Pi_{P1} div u ||_{L2}: the divergence residual in the multiplier space,
/// the quantity the saddle-point solve drives to solver precision.
double discrete_divergence_residual(const P2Space& space, const std::vector<Vec2>& pos,
                                    const Eigen::VectorXd& u);
/// Same residual against a prescribed constraint right-hand side (q, g).
double discrete_divergence_residual(const P2Space& space, const std::vector<Vec2>& pos,
                                    const Eigen::VectorXd& u, const Eigen::VectorXd& rhs_div);

using SpaceTimeField = std::function<Vec2(double, const Vec2&)>;

/// One implicit time layer of the momentum system in its Picard-frozen form.
/// In homogenized mode (`background` set) the unknown is w = u - V on the
/// transported mesh: viscosity is evaluated at D(w_guess + V), transport is
/// w_guess . grad(w + V), and the right-hand side carries f - d_t V - V.grad V.
/// With no background the same layer discretizes the plain momentum equation
/// for the full velocity (fixed-mesh verification mode).
struct LayerSystemInput {
  const P2Space* space = nullptr;
  const std::vector<Vec2>* pos = nullptr;
  double t = 0.0;
  double dt = 1.0;
  double q = 2.0;
  double p = 2.5;
  double inv_m = 0.0;  // 1/M, 0 disables the augmentation
  const Eigen::VectorXd* w_guess = nullptr;
  const Eigen::VectorXd* w_old = nullptr;  // omit to drop the time term
  const VelocityFieldSpec* background = nullptr;
  SpaceTimeField body_force;  // optional
  bool include_convection = true;
};

struct LayerSystem {
  SparseMat momentum;               // (1/dt) M + viscous + convective
  SparseMat mass;                   // M alone (ledger use)
  SparseMat divergence;             // (q, div u)
  Eigen::VectorXd rhs;              // momentum right-hand side
  Eigen::VectorXd pressure_integral;
};

LayerSystem assemble_weak_form(const LayerSystemInput& in);

/// Saddle solve with nodal Dirichlet data on all boundary nodes and a
/// zero-mean pressure multiplier. Direct sparse factorization.
struct SaddleSolution {
  Eigen::VectorXd velocity;  // full coefficient vector, boundary values set
  Eigen::VectorXd pressure;  // zero-mean
  double div_residual = 0.0;
  double mean_multiplier = 0.0;
};

SaddleSolution solve_saddle(const SparseMat& momentum, const SparseMat& divergence,
                            const Eigen::VectorXd& pressure_integral, const Eigen::VectorXd& rhs,
                            const P2Space& space, const std::vector<Vec2>& pos,
                            const std::function<Vec2(const Vec2&)>& dirichlet,
                            const Eigen::VectorXd* rhs_div = nullptr);

/// Factored form of the same saddle solve, for repeated right-hand sides on a
/// fixed operator (boundary values may still vary per solve).
class SaddleFactorization {
public:
  SaddleFactorization(SparseMat momentum, SparseMat divergence,
                      Eigen::VectorXd pressure_integral, const P2Space& space,
                      const std::vector<Vec2>& pos);
  ~SaddleFactorization();
  SaddleFactorization(SaddleFactorization&&) noexcept;

  SaddleSolution solve(const Eigen::VectorXd& rhs, const std::function<Vec2(const Vec2&)>& dirichlet,
                       const Eigen::VectorXd* rhs_div = nullptr) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rheoshape
