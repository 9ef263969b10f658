#pragma once

#include <functional>

#include "rheoshape/fem/moving_mesh.hpp"

namespace rheoshape {

struct QuadPoint {
  int layer;
  double t;
  int tri;
  Eigen::Vector3d bary;
  Vec2 x;
};

/// Layer-wise Gauss quadrature in space, trapezoid in time, over the moving
/// mesh.
double spacetime_integrate(const MovingMesh& mm,
                           const std::function<double(const QuadPoint&)>& integrand);

/// Space-only quadrature of an integrand over one layer.
double layer_integrate(const MovingMesh& mm, int layer,
                       const std::function<double(const QuadPoint&)>& integrand);

}  // namespace rheoshape
