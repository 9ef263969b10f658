#include "rheoshape/fem/assemble.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "rheoshape/rheology/rheology.hpp"

namespace rheoshape {

namespace {

using Triplet = Eigen::Triplet<double>;

template <typename Kernel>
SparseMat assemble_p2_pair(const P2Space& space, const std::vector<Vec2>& pos, Kernel kernel) {
  const auto& quad = TriQuadrature::degree4();
  std::vector<Triplet> trip;
  trip.reserve(space.tri->triangle_count() * 144);
  for (int t = 0; t < space.tri->triangle_count(); ++t) {
    const ElementContext ctx = ElementContext::make(space, t, pos);
    double local[12][12] = {};
    for (int qp = 0; qp < TriQuadrature::n; ++qp) {
      const double w = quad.weight[qp] * ctx.area;
      for (int i = 0; i < 6; ++i)
        for (int ci = 0; ci < 2; ++ci)
          for (int j = 0; j < 6; ++j)
            for (int cj = 0; cj < 2; ++cj)
              local[2 * i + ci][2 * j + cj] +=
                  w * kernel(ctx.basis[qp].n[i], ctx.grad[qp][i], ci, ctx.basis[qp].n[j],
                             ctx.grad[qp][j], cj);
    }
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        if (local[i][j] != 0.0)
          trip.emplace_back(2 * ctx.nodes[i / 2] + i % 2, 2 * ctx.nodes[j / 2] + j % 2,
                            local[i][j]);
  }
  SparseMat m(space.velocity_dofs(), space.velocity_dofs());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SparseMat p2_vector_mass(const P2Space& space, const std::vector<Vec2>& pos) {
  return assemble_p2_pair(space, pos,
                          [](double ni, const Vec2&, int ci, double nj, const Vec2&, int cj) {
                            return ci == cj ? ni * nj : 0.0;
                          });
}

SparseMat p2_vector_laplacian(const P2Space& space, const std::vector<Vec2>& pos) {
  return assemble_p2_pair(space, pos,
                          [](double, const Vec2& gi, int ci, double, const Vec2& gj, int cj) {
                            return ci == cj ? gi.dot(gj) : 0.0;
                          });
}

SparseMat p2_vector_sym_product(const P2Space& space, const std::vector<Vec2>& pos) {
  // (D phi_j : D phi_i) = 1/2 (delta_{ci cj} grad_i . grad_j + d_{cj} N_i d_{ci} N_j)
  return assemble_p2_pair(space, pos,
                          [](double, const Vec2& gi, int ci, double, const Vec2& gj, int cj) {
                            double v = 0.5 * gi[cj] * gj[ci];
                            if (ci == cj) v += 0.5 * gi.dot(gj);
                            return v;
                          });
}

SparseMat p2_vector_div_product(const P2Space& space, const std::vector<Vec2>& pos) {
  return assemble_p2_pair(space, pos,
                          [](double, const Vec2& gi, int ci, double, const Vec2& gj, int cj) {
                            return gi[ci] * gj[cj];
                          });
}

SparseMat p2p1_divergence(const P2Space& space, const std::vector<Vec2>& pos) {
  const auto& quad = TriQuadrature::degree4();
  std::vector<Triplet> trip;
  for (int t = 0; t < space.tri->triangle_count(); ++t) {
    const ElementContext ctx = ElementContext::make(space, t, pos);
    const auto& tr = space.tri->triangles[t];
    for (int qp = 0; qp < TriQuadrature::n; ++qp) {
      const double w = quad.weight[qp] * ctx.area;
      const auto& l = quad.bary[qp];
      for (int pi = 0; pi < 3; ++pi)
        for (int j = 0; j < 6; ++j)
          for (int cj = 0; cj < 2; ++cj)
            trip.emplace_back(tr[pi], 2 * ctx.nodes[j] + cj, w * l[pi] * ctx.grad[qp][j][cj]);
    }
  }
  SparseMat m(space.tri->vertex_count(), space.velocity_dofs());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseMat p1_mass(const Triangulation& tri, const std::vector<Vec2>& pos) {
  const auto& quad = TriQuadrature::degree4();
  std::vector<Triplet> trip;
  for (int t = 0; t < tri.triangle_count(); ++t) {
    const auto& tr = tri.triangles[t];
    const double area = tri.triangle_area(t, pos);
    for (int qp = 0; qp < TriQuadrature::n; ++qp) {
      const double w = quad.weight[qp] * area;
      const auto& l = quad.bary[qp];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) trip.emplace_back(tr[i], tr[j], w * l[i] * l[j]);
    }
  }
  SparseMat m(tri.vertex_count(), tri.vertex_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::VectorXd p1_integrals(const Triangulation& tri, const std::vector<Vec2>& pos) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(tri.vertex_count());
  for (int t = 0; t < tri.triangle_count(); ++t) {
    const auto& tr = tri.triangles[t];
    const double third = tri.triangle_area(t, pos) / 3.0;
    for (int i = 0; i < 3; ++i) v[tr[i]] += third;
  }
  return v;
}

double discrete_divergence_residual(const P2Space& space, const std::vector<Vec2>& pos,
                                    const Eigen::VectorXd& u) {
  return discrete_divergence_residual(space, pos, u,
                                      Eigen::VectorXd::Zero(space.tri->vertex_count()));
}

double discrete_divergence_residual(const P2Space& space, const std::vector<Vec2>& pos,
                                    const Eigen::VectorXd& u, const Eigen::VectorXd& rhs_div) {
  const SparseMat d = p2p1_divergence(space, pos);
  const SparseMat mq = p1_mass(*space.tri, pos);
  const Eigen::VectorXd defect = d * u - rhs_div;
  Eigen::SimplicialLDLT<SparseMat> chol(mq);
  if (chol.info() != Eigen::Success)
    throw NumericalError("discrete_divergence_residual: P1 mass factorization failed");
  const Eigen::VectorXd y = chol.solve(defect);
  return std::sqrt(std::max(0.0, y.dot(defect)));
}

LayerSystem assemble_weak_form(const LayerSystemInput& in) {
  const P2Space& space = *in.space;
  const std::vector<Vec2>& pos = *in.pos;
  const auto& quad = TriQuadrature::degree4();
  const bool homogenized = in.background != nullptr;

  std::vector<Triplet> trip_mom, trip_mass, trip_div;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.velocity_dofs());

  for (int t = 0; t < space.tri->triangle_count(); ++t) {
    const ElementContext ctx = ElementContext::make(space, t, pos);
    const auto& tr = space.tri->triangles[t];
    double mom[12][12] = {};
    double mass[12][12] = {};
    double rloc[12] = {};
    for (int qp = 0; qp < TriQuadrature::n; ++qp) {
      const double w = quad.weight[qp] * ctx.area;
      const Vec2& x = ctx.x[qp];

      Vec2 wg = Vec2::Zero();
      Mat2 gw = Mat2::Zero();
      for (int k = 0; k < 6; ++k) {
        const Vec2 ck((*in.w_guess)[2 * ctx.nodes[k]], (*in.w_guess)[2 * ctx.nodes[k] + 1]);
        wg += ctx.basis[qp].n[k] * ck;
        gw.row(0) += ck.x() * ctx.grad[qp][k].transpose();
        gw.row(1) += ck.y() * ctx.grad[qp][k].transpose();
      }

      Vec2 v_val = Vec2::Zero(), v_dt = Vec2::Zero();
      Mat2 v_grad = Mat2::Zero();
      if (homogenized) {
        v_val = in.background->value(in.t, x);
        v_grad = in.background->gradient(in.t, x);
        v_dt = in.background->time_deriv(in.t, x);
      }

      const Mat2 grad_total = gw + v_grad;
      const Mat2 d_total = 0.5 * (grad_total + grad_total.transpose());
      const double dn = d_total.norm();
      const double nu = power_law_viscosity(dn, in.q) +
                        (in.inv_m > 0.0 ? in.inv_m * power_law_viscosity(dn, in.p) : 0.0);
      const Mat2 dv = 0.5 * (v_grad + v_grad.transpose());

      Vec2 force = in.body_force ? in.body_force(in.t, x) : Vec2::Zero();
      if (homogenized) force -= v_dt + v_grad * v_val;

      Vec2 w_old_val = Vec2::Zero();
      if (in.w_old) {
        for (int k = 0; k < 6; ++k)
          w_old_val += ctx.basis[qp].n[k] *
                       Vec2((*in.w_old)[2 * ctx.nodes[k]], (*in.w_old)[2 * ctx.nodes[k] + 1]);
      }

      for (int i = 0; i < 6; ++i) {
        const double ni = ctx.basis[qp].n[i];
        const Vec2& gi = ctx.grad[qp][i];
        for (int ci = 0; ci < 2; ++ci) {
          const int I = 2 * i + ci;
          // rhs: force, time history, lifted viscous and transport terms
          double r = force[ci] * ni;
          if (in.w_old) r += w_old_val[ci] * ni / in.dt;
          if (homogenized) {
            // -(nu D V) : D phi_i  with  (DV : D phi_i) = DV.row(ci) . grad_i
            r -= nu * dv.row(ci).dot(gi);
            if (in.include_convection) r -= (wg.dot(v_grad.row(ci))) * ni;
          }
          rloc[I] += w * r;
          for (int j = 0; j < 6; ++j) {
            const double nj = ctx.basis[qp].n[j];
            const Vec2& gj = ctx.grad[qp][j];
            for (int cj = 0; cj < 2; ++cj) {
              const int J = 2 * j + cj;
              double a = 0.0;
              // viscous: nu (D phi_j : D phi_i)
              double dd = 0.5 * gi[cj] * gj[ci];
              if (ci == cj) dd += 0.5 * gi.dot(gj);
              a += nu * dd;
              if (ci == cj) {
                if (in.w_old) a += ni * nj / in.dt;  // time term
                if (in.include_convection) a += (wg.dot(gj)) * ni;
              }
              mom[I][J] += w * a;
              if (ci == cj) mass[I][J] += w * ni * nj;
            }
          }
        }
      }
      // divergence rows: (q, div u)
      for (int pi = 0; pi < 3; ++pi)
        for (int j = 0; j < 6; ++j)
          for (int cj = 0; cj < 2; ++cj)
            trip_div.emplace_back(tr[pi], 2 * ctx.nodes[j] + cj,
                                  w * quad.bary[qp][pi] * ctx.grad[qp][j][cj]);
    }
    for (int i = 0; i < 12; ++i) {
      const int gi = 2 * ctx.nodes[i / 2] + i % 2;
      rhs[gi] += rloc[i];
      for (int j = 0; j < 12; ++j) {
        const int gj = 2 * ctx.nodes[j / 2] + j % 2;
        if (mom[i][j] != 0.0) trip_mom.emplace_back(gi, gj, mom[i][j]);
        if (mass[i][j] != 0.0) trip_mass.emplace_back(gi, gj, mass[i][j]);
      }
    }
  }

  LayerSystem sys;
  sys.momentum.resize(space.velocity_dofs(), space.velocity_dofs());
  sys.momentum.setFromTriplets(trip_mom.begin(), trip_mom.end());
  sys.mass.resize(space.velocity_dofs(), space.velocity_dofs());
  sys.mass.setFromTriplets(trip_mass.begin(), trip_mass.end());
  sys.divergence.resize(space.tri->vertex_count(), space.velocity_dofs());
  sys.divergence.setFromTriplets(trip_div.begin(), trip_div.end());
  sys.rhs = std::move(rhs);
  sys.pressure_integral = p1_integrals(*space.tri, pos);
  return sys;
}

struct SaddleFactorization::Impl {
  SparseMat momentum, divergence;
  Eigen::VectorXd pressure_integral;
  const P2Space* space;
  const std::vector<Vec2>* pos;
  std::vector<int> sysindex;
  int n_free = 0, np = 0, nv = 0;
  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
  Eigen::SimplicialLDLT<SparseMat> p1_mass_chol;
};

SaddleFactorization::SaddleFactorization(SparseMat momentum, SparseMat divergence,
                                         Eigen::VectorXd pressure_integral, const P2Space& space,
                                         const std::vector<Vec2>& pos)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.momentum = std::move(momentum);
  im.divergence = std::move(divergence);
  im.pressure_integral = std::move(pressure_integral);
  im.space = &space;
  im.pos = &pos;
  im.nv = space.velocity_dofs();
  im.np = static_cast<int>(im.pressure_integral.size());
  im.sysindex.assign(im.nv, -1);
  for (int k = 0; k < space.node_count(); ++k) {
    if (space.node_on_boundary(k)) continue;
    im.sysindex[2 * k] = im.n_free++;
    im.sysindex[2 * k + 1] = im.n_free++;
  }

  const int n_sys = im.n_free + im.np + 1;
  std::vector<Triplet> trip;
  trip.reserve(im.momentum.nonZeros() + 2 * im.divergence.nonZeros() + 2 * im.np);
  for (int col = 0; col < im.momentum.outerSize(); ++col)
    for (SparseMat::InnerIterator it(im.momentum, col); it; ++it) {
      const int i = im.sysindex[it.row()];
      const int j = im.sysindex[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  for (int col = 0; col < im.divergence.outerSize(); ++col)
    for (SparseMat::InnerIterator it(im.divergence, col); it; ++it) {
      const int p_row = im.n_free + static_cast<int>(it.row());
      const int j = im.sysindex[it.col()];
      if (j >= 0) {
        trip.emplace_back(p_row, j, it.value());
        trip.emplace_back(j, p_row, -it.value());  // -(p, div phi_i) in momentum
      }
    }
  for (int p = 0; p < im.np; ++p) {
    trip.emplace_back(im.n_free + p, im.n_free + im.np, im.pressure_integral[p]);
    trip.emplace_back(im.n_free + im.np, im.n_free + p, im.pressure_integral[p]);
  }

  SparseMat sys(n_sys, n_sys);
  sys.setFromTriplets(trip.begin(), trip.end());
  sys.makeCompressed();
  im.lu.analyzePattern(sys);
  im.lu.factorize(sys);
  if (im.lu.info() != Eigen::Success)
    throw NumericalError("SaddleFactorization: singular system");
  im.p1_mass_chol.compute(p1_mass(*space.tri, pos));
  if (im.p1_mass_chol.info() != Eigen::Success)
    throw NumericalError("SaddleFactorization: P1 mass factorization failed");
}

SaddleFactorization::~SaddleFactorization() = default;
SaddleFactorization::SaddleFactorization(SaddleFactorization&&) noexcept = default;

SaddleSolution SaddleFactorization::solve(const Eigen::VectorXd& rhs,
                                          const std::function<Vec2(const Vec2&)>& dirichlet,
                                          const Eigen::VectorXd* rhs_div) const {
  const Impl& im = *impl_;
  const P2Space& space = *im.space;
  Eigen::VectorXd bc = Eigen::VectorXd::Zero(im.nv);
  bool any_bc = false;
  if (dirichlet) {
    for (int k = 0; k < space.node_count(); ++k) {
      if (!space.node_on_boundary(k)) continue;
      const Vec2 g = dirichlet(space.node_position(k, *im.pos));
      bc[2 * k] = g.x();
      bc[2 * k + 1] = g.y();
      any_bc = any_bc || g.squaredNorm() > 0.0;
    }
  }

  Eigen::VectorXd b = Eigen::VectorXd::Zero(im.n_free + im.np + 1);
  for (int i = 0; i < im.nv; ++i)
    if (im.sysindex[i] >= 0) b[im.sysindex[i]] += rhs[i];
  if (rhs_div)
    for (int p = 0; p < im.np; ++p) b[im.n_free + p] += (*rhs_div)[p];
  if (any_bc) {
    for (int col = 0; col < im.momentum.outerSize(); ++col)
      for (SparseMat::InnerIterator it(im.momentum, col); it; ++it) {
        const int i = im.sysindex[it.row()];
        if (i >= 0 && im.sysindex[it.col()] < 0) b[i] -= it.value() * bc[it.col()];
      }
    for (int col = 0; col < im.divergence.outerSize(); ++col)
      for (SparseMat::InnerIterator it(im.divergence, col); it; ++it)
        if (im.sysindex[it.col()] < 0)
          b[im.n_free + static_cast<int>(it.row())] -= it.value() * bc[it.col()];
  }

  const Eigen::VectorXd sol = im.lu.solve(b);
  if (!sol.allFinite()) throw NumericalError("SaddleFactorization: non-finite solution");

  SaddleSolution out;
  out.velocity = bc;
  for (int i = 0; i < im.nv; ++i)
    if (im.sysindex[i] >= 0) out.velocity[i] = sol[im.sysindex[i]];
  out.pressure = sol.segment(im.n_free, im.np);
  out.mean_multiplier = sol[im.n_free + im.np];
  Eigen::VectorXd defect = im.divergence * out.velocity;
  if (rhs_div) defect -= *rhs_div;
  const Eigen::VectorXd y = im.p1_mass_chol.solve(defect);
  out.div_residual = std::sqrt(std::max(0.0, y.dot(defect)));
  return out;
}

SaddleSolution solve_saddle(const SparseMat& momentum, const SparseMat& divergence,
                            const Eigen::VectorXd& pressure_integral, const Eigen::VectorXd& rhs,
                            const P2Space& space, const std::vector<Vec2>& pos,
                            const std::function<Vec2(const Vec2&)>& dirichlet,
                            const Eigen::VectorXd* rhs_div) {
  SaddleFactorization fact(momentum, divergence, pressure_integral, space, pos);
  return fact.solve(rhs, dirichlet, rhs_div);
}

}  // namespace rheoshape
