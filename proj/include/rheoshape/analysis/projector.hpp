#pragma once

#include "rheoshape/analysis/bogovskii.hpp"
#include "rheoshape/fem/piola.hpp"

namespace rheoshape {

/// Discrete space-time test field on a moving mesh: one quadratic vector
/// coefficient set per layer.
struct TestField {
  std::vector<Eigen::VectorXd> layer_coeffs;

  /// Separable field s(t) * eta(x) carried to the layers by the Piola
  /// push-forward of a reference spatial field; time_poly is evaluated in
  /// t/T like the driving-field splines.
  static TestField from_reference(const MovingMesh& mm, const PiolaTransform& piola,
                                  const Eigen::VectorXd& spatial_ref,
                                  const std::vector<double>& time_poly);
};

struct Submesh {
  Triangulation mesh;
  std::vector<int> parent_vertex;    // sub vertex -> parent vertex
  std::vector<int> parent_triangle;  // sub triangle -> parent triangle
  std::vector<int> parent_node;      // sub P2 node -> parent P2 node
};

Submesh extract_submesh(const Triangulation& parent, const P2Space& parent_space,
                        const std::vector<char>& keep_triangle);

/// Cutoff and mollifier geometry of the density pipeline: the cutoff vanishes
/// outside the b/n-interior (and within b/n of the final time), equals one on
/// the a/n-interior, with slopes O(n); the mollifier is a polynomial bump
/// supported in a space-time ball of radius c/n with c < b - 1 (realized as a
/// tensor kernel with half-radius c/(2n) per factor, which stays inside that
/// ball).
struct ProjectorParams {
  double a = 3.0;
  double b = 2.0;
  double c = 0.5;  // = 0.5 (b - 1)
  int kernel_quad = 5;
  double support_tol = 1e-11;  // relative threshold declaring a node "in support"
};

struct ProjectorResult {
  TestField output;
  /// Discrete divergence residual per layer after the corrections.
  std::vector<double> div_residual;
  /// L2 norms of the reference-side and layer-side corrections per layer.
  std::vector<double> correction_norm_ref;
  std::vector<double> correction_norm_layer;
  /// Min distance of supported output nodes to the layer boundary, over all
  /// layers (the collar containment diagnostic).
  double support_min_distance = 0.0;
  /// Prescribed collar depth the support must respect: (b - c/2)/n minus one
  /// element band.
  double prescribed_collar = 0.0;
  std::vector<char> submesh_elements;  // reference-side correction region
};

/// The constructive density pipeline: pull back by Piola to the reference
/// cylinder, multiply by the smooth space-time cutoff, mollify, subtract the
/// Bogovskii lift of the divergence defect, push forward by the inverse
/// Piola; a final per-layer Bogovskii correction absorbs the push-forward
/// interpolation defect so the output is discretely divergence-free on every
/// layer.
ProjectorResult project_solenoidal_testfield(const TestField& eta, const MovingMesh& mm,
                                             const PiolaTransform& piola, int n,
                                             const ProjectorParams& params = {});

/// W^{1,2}(layer)-norm of the difference of two test fields, per layer.
std::vector<double> testfield_w12_errors(const MovingMesh& mm, const TestField& a,
                                         const TestField& b);
/// W^{1,2} norms per layer of a single field.
std::vector<double> testfield_w12_norms(const MovingMesh& mm, const TestField& a);

}  // namespace rheoshape
