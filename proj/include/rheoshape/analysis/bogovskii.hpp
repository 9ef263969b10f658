#pragma once

#include <memory>

#include "rheoshape/fem/assemble.hpp"

namespace rheoshape {

/// Discrete right inverse of the divergence with zero boundary values,
/// realized by a Stokes-like auxiliary solve: vector Laplacian with a
/// multiplier enforcing (div B, q) = (f, q) for every multiplier q. The data
/// must satisfy the zero-mean compatibility condition.
struct BogovskiiResult {
  Eigen::VectorXd field;          // P2 vector coefficients, zero trace
  double div_residual = 0.0;      // || Pi(div B - f) ||_{L2}
  double observed_constant = 0.0; // ||B||_{W^{1,2}} / ||f||_{L2}
};

/// f given by P1 vertex coefficients on the mesh.
BogovskiiResult bogovskii(const Eigen::VectorXd& f_p1, const Triangulation& mesh,
                          const std::vector<Vec2>& pos);

/// Factored form of the same auxiliary problem for repeated right-hand sides
/// on a fixed mesh.
class BogovskiiSolver {
public:
  BogovskiiSolver(const Triangulation& mesh, const std::vector<Vec2>& pos);
  ~BogovskiiSolver();
  BogovskiiSolver(BogovskiiSolver&&) noexcept;

  BogovskiiResult apply(const Eigen::VectorXd& f_p1) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// u minus the Bogovskii lift of its discrete divergence: the result has
/// vanishing discrete divergence. u must have zero boundary flux (e.g. zero
/// trace).
Eigen::VectorXd bogovskii_correct(const P2Space& space, const std::vector<Vec2>& pos,
                                  const Eigen::VectorXd& u);

/// Subtract the discrete mean so the coefficients satisfy the compatibility
/// condition exactly.
Eigen::VectorXd remove_p1_mean(const Triangulation& mesh, const std::vector<Vec2>& pos,
                               Eigen::VectorXd f_p1);

}  // namespace rheoshape
