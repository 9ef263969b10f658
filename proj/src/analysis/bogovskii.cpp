#include "rheoshape/analysis/bogovskii.hpp"

#include <Eigen/SparseCholesky>
#include <sstream>

namespace rheoshape {

struct BogovskiiSolver::Impl {
  const Triangulation* mesh;
  std::vector<Vec2> pos;
  std::unique_ptr<P2Space> space;
  SparseMat mq, lap, m2;
  Eigen::VectorXd pint;
  std::unique_ptr<SaddleFactorization> fact;
};

BogovskiiSolver::BogovskiiSolver(const Triangulation& mesh, const std::vector<Vec2>& pos)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.mesh = &mesh;
  im.pos = pos;
  im.space = std::make_unique<P2Space>(mesh);
  im.mq = p1_mass(mesh, im.pos);
  im.lap = p2_vector_laplacian(*im.space, im.pos);
  im.m2 = p2_vector_mass(*im.space, im.pos);
  im.pint = p1_integrals(mesh, im.pos);
  im.fact = std::make_unique<SaddleFactorization>(im.lap, p2p1_divergence(*im.space, im.pos),
                                                  im.pint, *im.space, im.pos);
}

BogovskiiSolver::~BogovskiiSolver() = default;
BogovskiiSolver::BogovskiiSolver(BogovskiiSolver&&) noexcept = default;

BogovskiiResult BogovskiiSolver::apply(const Eigen::VectorXd& f_p1) const {
  const Impl& im = *impl_;
  const double total = im.pint.dot(f_p1);
  const double norm = std::sqrt(std::max(0.0, f_p1.dot(im.mq * f_p1)));
  if (std::abs(total) > 1e-10 * std::max(norm, 1e-300)) {
    std::ostringstream msg;
    msg << "bogovskii: compatibility violated, int f = " << total << " with ||f|| = " << norm;
    throw NumericalError(msg.str());
  }
  const Eigen::VectorXd rhs = Eigen::VectorXd::Zero(im.space->velocity_dofs());
  const Eigen::VectorXd rhs_div = im.mq * f_p1;
  const SaddleSolution sol = im.fact->solve(rhs, nullptr, &rhs_div);

  BogovskiiResult out;
  out.field = sol.velocity;
  out.div_residual = sol.div_residual;
  const double w12 = std::sqrt(out.field.dot(im.m2 * out.field) + out.field.dot(im.lap * out.field));
  out.observed_constant = norm > 0.0 ? w12 / norm : 0.0;
  return out;
}

BogovskiiResult bogovskii(const Eigen::VectorXd& f_p1, const Triangulation& mesh,
                          const std::vector<Vec2>& pos) {
  BogovskiiSolver solver(mesh, pos);
  return solver.apply(f_p1);
}

Eigen::VectorXd remove_p1_mean(const Triangulation& mesh, const std::vector<Vec2>& pos,
                               Eigen::VectorXd f_p1) {
  const Eigen::VectorXd pint = p1_integrals(mesh, pos);
  const double volume = pint.sum();
  const double mean = pint.dot(f_p1) / volume;
  f_p1.array() -= mean;
  return f_p1;
}

Eigen::VectorXd bogovskii_correct(const P2Space& space, const std::vector<Vec2>& pos,
                                  const Eigen::VectorXd& u) {
  const Triangulation& mesh = *space.tri;
  const SparseMat mq = p1_mass(mesh, pos);
  const SparseMat div = p2p1_divergence(space, pos);
  Eigen::SimplicialLDLT<SparseMat> chol(mq);
  if (chol.info() != Eigen::Success)
    throw NumericalError("bogovskii_correct: P1 mass factorization failed");
  Eigen::VectorXd defect = chol.solve(div * u);
  defect = remove_p1_mean(mesh, pos, std::move(defect));
  const BogovskiiResult lift = bogovskii(defect, mesh, pos);
  return u - lift.field;
}

}  // namespace rheoshape
