#include "rheoshape/analysis/projector.hpp"

#include <Eigen/SparseCholesky>
#include <map>
#include <sstream>

#include "rheoshape/core/poly_bound.hpp"

namespace rheoshape {

TestField TestField::from_reference(const MovingMesh& mm, const PiolaTransform& piola,
                                    const Eigen::VectorXd& spatial_ref,
                                    const std::vector<double>& time_poly) {
  TestField f;
  f.layer_coeffs.resize(mm.layer_count());
  const double horizon = mm.grid().t_end;
  for (int i = 0; i < mm.layer_count(); ++i) {
    const double s = poly_eval(time_poly, mm.layer_time(i) / horizon);
    f.layer_coeffs[i] = piola.push_forward_field(i, Eigen::VectorXd(s * spatial_ref));
  }
  return f;
}

Submesh extract_submesh(const Triangulation& parent, const P2Space& parent_space,
                        const std::vector<char>& keep_triangle) {
  Submesh sub;
  std::vector<int> vmap(parent.vertex_count(), -1);
  for (int t = 0; t < parent.triangle_count(); ++t) {
    if (!keep_triangle[t]) continue;
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      const int v = parent.triangles[t][k];
      if (vmap[v] < 0) {
        vmap[v] = static_cast<int>(sub.mesh.vertices.size());
        sub.mesh.vertices.push_back(parent.vertices[v]);
        sub.parent_vertex.push_back(v);
      }
      tri[k] = vmap[v];
    }
    sub.mesh.triangles.push_back(tri);
    sub.parent_triangle.push_back(t);
  }
  if (sub.mesh.triangles.empty()) throw NumericalError("extract_submesh: empty selection");
  sub.mesh.finalize();

  // P2 node map: vertices then edges via parent edge lookup.
  std::map<std::pair<int, int>, int> parent_edge;
  for (int e = 0; e < parent.edge_count(); ++e)
    parent_edge[{parent.edges[e][0], parent.edges[e][1]}] = e;
  sub.parent_node.resize(sub.mesh.vertex_count() + sub.mesh.edge_count());
  for (int v = 0; v < sub.mesh.vertex_count(); ++v) sub.parent_node[v] = sub.parent_vertex[v];
  for (int e = 0; e < sub.mesh.edge_count(); ++e) {
    const auto key = std::minmax(sub.parent_vertex[sub.mesh.edges[e][0]],
                                 sub.parent_vertex[sub.mesh.edges[e][1]]);
    const auto it = parent_edge.find({key.first, key.second});
    if (it == parent_edge.end()) throw NumericalError("extract_submesh: edge not in parent");
    sub.parent_node[sub.mesh.vertex_count() + e] = parent_space.n_vertex + it->second;
  }
  return sub;
}

namespace {

// C^2 smooth step: 0 below 0, 1 above 1.
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double boundary_distance_to_mesh(const Triangulation& tri, const std::vector<Vec2>& pos,
                                 const Vec2& p) {
  double d2 = 1e300;
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    if (!tri.boundary_edge[e]) continue;
    const Vec2& a = pos[tri.edges[e][0]];
    const Vec2& b = pos[tri.edges[e][1]];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    d2 = std::min(d2, (p - (a + s * ab)).squaredNorm());
  }
  return std::sqrt(d2);
}

struct FeCacheEntry {
  bool inside = false;
  std::array<int, 6> nodes{};
  std::array<double, 6> shape{};
  double cutoff = 0.0;  // spatial cutoff value at the probe point
};

// Per-layer Bogovskii correction on the collar submesh, extended by zero.
// Returns the L2 norm of the subtracted lift.
double correct_on_submesh(const Submesh& sub, const std::vector<Vec2>& sub_pos,
                          const BogovskiiSolver& solver, const P2Space& parent_space,
                          Eigen::VectorXd& coeffs) {
  P2Space sub_space(sub.mesh);
  Eigen::VectorXd u_sub(sub_space.velocity_dofs());
  for (int k = 0; k < sub_space.node_count(); ++k) {
    u_sub[2 * k] = coeffs[2 * sub.parent_node[k]];
    u_sub[2 * k + 1] = coeffs[2 * sub.parent_node[k] + 1];
  }
  const SparseMat mq = p1_mass(sub.mesh, sub_pos);
  const SparseMat div = p2p1_divergence(sub_space, sub_pos);
  Eigen::SimplicialLDLT<SparseMat> chol(mq);
  if (chol.info() != Eigen::Success)
    throw NumericalError("projector: submesh mass factorization failed");
  Eigen::VectorXd defect = chol.solve(div * u_sub);
  defect = remove_p1_mean(sub.mesh, sub_pos, std::move(defect));
  const BogovskiiResult lift = solver.apply(defect);
  for (int k = 0; k < sub_space.node_count(); ++k) {
    coeffs[2 * sub.parent_node[k]] -= lift.field[2 * k];
    coeffs[2 * sub.parent_node[k] + 1] -= lift.field[2 * k + 1];
  }
  const SparseMat m2 = p2_vector_mass(sub_space, sub_pos);
  return std::sqrt(std::max(0.0, lift.field.dot(m2 * lift.field)));
}

}  // namespace

ProjectorResult project_solenoidal_testfield(const TestField& eta, const MovingMesh& mm,
                                             const PiolaTransform& piola, int n,
                                             const ProjectorParams& params) {
  if (n < 1) throw NumericalError("projector: n must be >= 1");
  const Triangulation& ref = mm.topology();
  const P2Space& space = mm.space();
  const int layers = mm.layer_count();
  const double horizon = mm.grid().t_end;
  const double dt = mm.grid().dt();
  const double h = ref.mesh_size(mm.layer_vertices(0));
  if (static_cast<int>(eta.layer_coeffs.size()) != layers)
    throw NumericalError("projector: field/mesh layer mismatch");

  // Resolution guards: the collar must span at least two element bands and
  // the time grid must resolve the mollifier half-width.
  if (h * n > 0.35) {
    std::ostringstream msg;
    msg << "projector: cutoff collar thinner than 2 elements (h = " << h << ", n = " << n << ")";
    throw NumericalError(msg.str());
  }
  const double kernel_r = params.c / (2.0 * n);
  if (dt > kernel_r) {
    std::ostringstream msg;
    msg << "projector: layer spacing " << dt << " does not resolve the mollifier radius "
        << kernel_r;
    throw NumericalError(msg.str());
  }

  // 1. Pull everything back to the reference cylinder.
  std::vector<Eigen::VectorXd> eta_hat(layers);
  for (int i = 0; i < layers; ++i) eta_hat[i] = piola.pull_back_field(i, eta.layer_coeffs[i]);

  // 2. Geometry of the cutoff on the reference domain.
  const auto& ref_pos = mm.layer_vertices(0);
  const auto& ref_nodes = mm.layer_nodes(0);
  const int n_nodes = space.node_count();
  auto cutoff_space = [&](double dist) {
    return smooth_step((dist * n - params.b) / (params.a - params.b));
  };
  auto cutoff_time = [&](double t) {
    return smooth_step(((horizon - std::abs(t)) * n - params.b) / (params.a - params.b));
  };

  // Tensor mollifier quadrature: offsets and weights, discretely normalized.
  const int kq = params.kernel_quad;
  std::vector<Vec2> offsets;
  std::vector<double> kweights;
  {
    std::vector<double> gp(kq), gw(kq);
    for (int i = 0; i < kq; ++i) {  // closed uniform rule is fine after normalization
      gp[i] = -1.0 + 2.0 * (i + 0.5) / kq;
      gw[i] = 1.0;
    }
    double total = 0.0;
    for (int i = 0; i < kq; ++i)
      for (int j = 0; j < kq; ++j) {
        const Vec2 y(gp[i] * kernel_r, gp[j] * kernel_r);
        const double rho2 = y.squaredNorm() / (kernel_r * kernel_r);
        if (rho2 >= 1.0) continue;
        const double w = gw[i] * gw[j] * std::pow(1.0 - rho2, 3);
        offsets.push_back(y);
        kweights.push_back(w);
        total += w;
      }
    for (double& w : kweights) w /= total;
  }

  // FE cache at all probe points (same geometry for every layer).
  const PointLocator locator(ref, ref_pos);
  const std::size_t n_off = offsets.size();
  std::vector<FeCacheEntry> cache(static_cast<std::size_t>(n_nodes) * n_off);
  for (int k = 0; k < n_nodes; ++k) {
    for (std::size_t o = 0; o < n_off; ++o) {
      FeCacheEntry& ce = cache[k * n_off + o];
      const Vec2 p = ref_nodes[k] + offsets[o];
      const auto hit = locator.locate(p, 1e-9);
      if (!hit) continue;  // outside: zero extension
      ce.inside = true;
      ce.nodes = space.cell_nodes(hit->triangle);
      const P2Basis basis = P2Basis::at(hit->bary);
      ce.shape = basis.n;
      ce.cutoff = cutoff_space(boundary_distance_to_mesh(ref, ref_pos, p));
    }
  }

  // 3. Spatially convolved cutoff field per source layer.
  std::vector<Eigen::VectorXd> sc(layers);
  for (int j = 0; j < layers; ++j) {
    sc[j] = Eigen::VectorXd::Zero(space.velocity_dofs());
    const double zt = cutoff_time(mm.layer_time(j));
    if (zt == 0.0) continue;
    const Eigen::VectorXd& ej = eta_hat[j];
    for (int k = 0; k < n_nodes; ++k) {
      Vec2 acc = Vec2::Zero();
      for (std::size_t o = 0; o < n_off; ++o) {
        const FeCacheEntry& ce = cache[k * n_off + o];
        if (!ce.inside || ce.cutoff == 0.0) continue;
        Vec2 val = Vec2::Zero();
        for (int s = 0; s < 6; ++s)
          val += ce.shape[s] * Vec2(ej[2 * ce.nodes[s]], ej[2 * ce.nodes[s] + 1]);
        acc += kweights[o] * ce.cutoff * val;
      }
      sc[j][2 * k] = zt * acc.x();
      sc[j][2 * k + 1] = zt * acc.y();
    }
  }

  // 4. Time convolution on the layer grid, with even reflection at t = 0.
  std::vector<Eigen::VectorXd> tilde(layers);
  for (int i = 0; i < layers; ++i) {
    const double ti = mm.layer_time(i);
    double total = 0.0;
    tilde[i] = Eigen::VectorXd::Zero(space.velocity_dofs());
    const int reach = static_cast<int>(std::ceil(kernel_r / dt)) + 1;
    for (int j = i - reach; j <= i + reach; ++j) {
      const double tj = mm.grid().t_begin + j * dt;
      const double tau = (ti - tj) / kernel_r;
      if (std::abs(tau) >= 1.0) continue;
      const double w = std::pow(1.0 - tau * tau, 3);
      const int jm = std::abs(j);  // even reflection below t = 0
      if (jm >= layers) continue;  // zero beyond the horizon
      tilde[i] += w * sc[jm];
      total += w;
    }
    if (total > 0.0) tilde[i] /= total;
  }

  // 5. Reference-side collar submesh: elements whose vertices clear 1/n.
  std::vector<double> vertex_dist(ref.vertex_count());
  for (int v = 0; v < ref.vertex_count(); ++v)
    vertex_dist[v] = boundary_distance_to_mesh(ref, ref_pos, ref_pos[v]);
  std::vector<char> keep(ref.triangle_count(), 0);
  for (int t = 0; t < ref.triangle_count(); ++t) {
    bool ok = true;
    for (int k = 0; k < 3; ++k) ok = ok && vertex_dist[ref.triangles[t][k]] > 1.0 / n;
    keep[t] = ok ? 1 : 0;
  }
  const Submesh sub = extract_submesh(ref, space, keep);

  // Support containment: every node carrying a value must belong to the
  // submesh interior region.
  {
    std::vector<char> node_in_sub(n_nodes, 0);
    P2Space sub_space(sub.mesh);
    for (int k = 0; k < sub_space.node_count(); ++k) node_in_sub[sub.parent_node[k]] = 1;
    double maxval = 0.0;
    for (int i = 0; i < layers; ++i) maxval = std::max(maxval, tilde[i].lpNorm<Eigen::Infinity>());
    for (int i = 0; i < layers; ++i)
      for (int k = 0; k < n_nodes; ++k)
        if (!node_in_sub[k] &&
            std::hypot(tilde[i][2 * k], tilde[i][2 * k + 1]) > params.support_tol * maxval)
          throw NumericalError("projector: mollified support leaks out of the collar submesh");
  }

  ProjectorResult out;
  out.submesh_elements = keep;
  out.prescribed_collar = (params.b - params.c / 2.0) / n - 2.0 * h;
  out.div_residual.assign(layers, 0.0);
  out.correction_norm_ref.assign(layers, 0.0);
  out.correction_norm_layer.assign(layers, 0.0);
  out.output.layer_coeffs.resize(layers);

  // 6. Reference-side Bogovskii correction (one factorization, all layers).
  std::vector<Vec2> sub_ref_pos(sub.mesh.vertex_count());
  for (int v = 0; v < sub.mesh.vertex_count(); ++v) sub_ref_pos[v] = ref_pos[sub.parent_vertex[v]];
  {
    BogovskiiSolver ref_solver(sub.mesh, sub_ref_pos);
    for (int i = 0; i < layers; ++i)
      out.correction_norm_ref[i] =
          correct_on_submesh(sub, sub_ref_pos, ref_solver, space, tilde[i]);
  }

  // 7. Push forward and absorb the interpolation defect per layer.
  double min_support_dist = 1e300;
  for (int i = 0; i < layers; ++i) {
    Eigen::VectorXd pushed = piola.push_forward_field(i, tilde[i]);
    std::vector<Vec2> sub_pos(sub.mesh.vertex_count());
    const auto& layer_pos = mm.layer_vertices(i);
    for (int v = 0; v < sub.mesh.vertex_count(); ++v)
      sub_pos[v] = layer_pos[sub.parent_vertex[v]];
    BogovskiiSolver layer_solver(sub.mesh, sub_pos);
    out.correction_norm_layer[i] =
        correct_on_submesh(sub, sub_pos, layer_solver, space, pushed);
    out.div_residual[i] = discrete_divergence_residual(space, layer_pos, pushed);

    const double maxval = pushed.lpNorm<Eigen::Infinity>();
    const auto& layer_nodes = mm.layer_nodes(i);
    for (int k = 0; k < n_nodes; ++k) {
      if (std::hypot(pushed[2 * k], pushed[2 * k + 1]) > params.support_tol * maxval) {
        min_support_dist = std::min(
            min_support_dist, boundary_distance_to_mesh(ref, layer_pos, layer_nodes[k]));
      }
    }
    out.output.layer_coeffs[i] = std::move(pushed);
  }
  out.support_min_distance = min_support_dist;
  return out;
}

std::vector<double> testfield_w12_errors(const MovingMesh& mm, const TestField& a,
                                         const TestField& b) {
  std::vector<double> err(mm.layer_count(), 0.0);
  const auto& quad = TriQuadrature::degree4();
  const P2Space& space = mm.space();
  for (int i = 0; i < mm.layer_count(); ++i) {
    const auto& pos = mm.layer_vertices(i);
    const Eigen::VectorXd diff = a.layer_coeffs[i] - b.layer_coeffs[i];
    double sum = 0.0;
    for (int t = 0; t < mm.topology().triangle_count(); ++t) {
      const ElementContext ctx = ElementContext::make(space, t, pos);
      for (int qp = 0; qp < TriQuadrature::n; ++qp) {
        Vec2 v = Vec2::Zero();
        Mat2 g = Mat2::Zero();
        for (int k = 0; k < 6; ++k) {
          const Vec2 c(diff[2 * ctx.nodes[k]], diff[2 * ctx.nodes[k] + 1]);
          v += ctx.basis[qp].n[k] * c;
          g.row(0) += c.x() * ctx.grad[qp][k].transpose();
          g.row(1) += c.y() * ctx.grad[qp][k].transpose();
        }
        sum += quad.weight[qp] * ctx.area * (v.squaredNorm() + g.squaredNorm());
      }
    }
    err[i] = std::sqrt(sum);
  }
  return err;
}

std::vector<double> testfield_w12_norms(const MovingMesh& mm, const TestField& a) {
  TestField zero;
  zero.layer_coeffs.assign(mm.layer_count(),
                           Eigen::VectorXd::Zero(mm.space().velocity_dofs()));
  return testfield_w12_errors(mm, a, zero);
}

}  // namespace rheoshape
