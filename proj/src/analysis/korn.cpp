#include "rheoshape/analysis/korn.hpp"

#include <Eigen/SparseCholesky>

namespace rheoshape {

namespace {

// Restriction of a P2 vector matrix to interior (zero-trace) dofs.
SparseMat restrict_interior(const SparseMat& m, const std::vector<int>& index, int n_int) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseMat::InnerIterator it(m, col); it; ++it) {
      const int i = index[it.row()];
      const int j = index[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  SparseMat out(n_int, n_int);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

double lp_norm_of_gradient(const P2Space& space, const std::vector<Vec2>& pos,
                           const Eigen::VectorXd& v, double p, bool symmetric_part) {
  const auto& quad = TriQuadrature::degree4();
  double sum = 0.0;
  for (int t = 0; t < space.tri->triangle_count(); ++t) {
    const ElementContext ctx = ElementContext::make(space, t, pos);
    for (int qp = 0; qp < TriQuadrature::n; ++qp) {
      Mat2 g = Mat2::Zero();
      for (int k = 0; k < 6; ++k) {
        const Vec2 c(v[2 * ctx.nodes[k]], v[2 * ctx.nodes[k] + 1]);
        g.row(0) += c.x() * ctx.grad[qp][k].transpose();
        g.row(1) += c.y() * ctx.grad[qp][k].transpose();
      }
      const Mat2 m = symmetric_part ? Mat2(0.5 * (g + g.transpose())) : g;
      sum += quad.weight[qp] * ctx.area * std::pow(m.norm(), p);
    }
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace

KornResult korn_constant(const Triangulation& mesh, const std::vector<Vec2>& pos, double p,
                         std::uint64_t seed, int power_iterations, int samples) {
  if (!(p >= 2.0)) throw NumericalError("korn_constant: p must be >= 2");
  P2Space space(mesh);
  std::vector<int> index(space.velocity_dofs(), -1);
  int n_int = 0;
  for (int k = 0; k < space.node_count(); ++k) {
    if (space.node_on_boundary(k)) continue;
    index[2 * k] = n_int++;
    index[2 * k + 1] = n_int++;
  }
  if (n_int == 0) throw NumericalError("korn_constant: no interior dofs");

  const SparseMat grad_full = p2_vector_laplacian(space, pos);
  const SparseMat sym_full = p2_vector_sym_product(space, pos);
  const SparseMat div_full = p2_vector_div_product(space, pos);
  const SparseMat kg = restrict_interior(grad_full, index, n_int);
  const SparseMat ks = restrict_interior(sym_full, index, n_int);
  const SparseMat kd = restrict_interior(div_full, index, n_int);

  KornResult out;
  Rng rng(seed);

  // Backbone identity and rigid-motion guard on random interior fields.
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v(n_int);
    for (int i = 0; i < n_int; ++i) v[i] = rng.normal();
    const double g2 = v.dot(kg * v);
    const double d2 = v.dot(ks * v);
    const double dv2 = v.dot(kd * v);
    out.identity_residual =
        std::max(out.identity_residual, std::abs(g2 - 2.0 * d2 + dv2) / std::max(g2, 1e-300));
    if (d2 <= 0.0) throw NumericalError("korn_constant: sampled field with vanishing D v");
    out.min_sym_fraction = std::min(out.min_sym_fraction, std::sqrt(d2 / g2));
  }

  // p = 2 pencil: largest lambda with Kg x = lambda Ks x.
  Eigen::SimplicialLDLT<SparseMat> chol(ks);
  if (chol.info() != Eigen::Success)
    throw NumericalError("korn_constant: (D., D.) factorization failed");
  Eigen::VectorXd x(n_int);
  for (int i = 0; i < n_int; ++i) x[i] = rng.normal();
  double lambda = 0.0;
  for (int it = 0; it < power_iterations; ++it) {
    Eigen::VectorXd y = chol.solve(kg * x);
    const double nrm = std::sqrt(y.dot(ks * y));
    if (!(nrm > 0.0)) throw NumericalError("korn_constant: power iteration degenerated");
    x = y / nrm;
    lambda = x.dot(kg * x) / x.dot(ks * x);
    out.iterations = it + 1;
  }
  const double c2 = std::sqrt(lambda);

  if (p == 2.0) {
    out.constant = c2;
    out.is_estimate = false;
    return out;
  }

  // Sampled lower bound for p != 2: the p = 2 eigenfield plus random fields.
  Eigen::VectorXd full = Eigen::VectorXd::Zero(space.velocity_dofs());
  for (int i = 0; i < space.velocity_dofs(); ++i)
    if (index[i] >= 0) full[i] = x[index[i]];
  double best = lp_norm_of_gradient(space, pos, full, p, false) /
                lp_norm_of_gradient(space, pos, full, p, true);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(space.velocity_dofs());
    for (int i = 0; i < space.velocity_dofs(); ++i)
      if (index[i] >= 0) v[i] = rng.normal();
    best = std::max(best, lp_norm_of_gradient(space, pos, v, p, false) /
                              lp_norm_of_gradient(space, pos, v, p, true));
  }
  out.constant = best;
  out.is_estimate = true;
  return out;
}

}  // namespace rheoshape
