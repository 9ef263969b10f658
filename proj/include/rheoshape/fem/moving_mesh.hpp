#pragma once

#include <memory>

#include "rheoshape/fem/spaces.hpp"
#include "rheoshape/geometry/flow_map.hpp"

namespace rheoshape {

/// Reference triangulation transported through the driving-field flow:
/// vertex paths follow phi, connectivity is fixed, and every layer is checked
/// for orientation and a triangle-quality floor. Edge (P2) nodes sit at the
/// midpoints of the transported edges.
class MovingMesh {
public:
  MovingMesh(Triangulation reference, const VelocityFieldSpec& field, const TimeGrid& grid,
             double dt_ode, double quality_floor = 0.05, const HoldAll* hold_all = nullptr);

  const Triangulation& topology() const { return ref_; }
  const P2Space& space() const { return space_; }
  const VelocityFieldSpec& field() const { return *field_; }
  const TimeGrid& grid() const { return grid_; }
  double dt_ode() const { return dt_ode_; }

  int layer_count() const { return grid_.layers; }
  double layer_time(int i) const { return grid_.time(i); }
  const std::vector<Vec2>& layer_vertices(int i) const { return vertex_pos_[i]; }
  const std::vector<Vec2>& layer_nodes(int i) const { return node_pos_[i]; }
  double layer_area(int i) const { return ref_.total_area(vertex_pos_[i]); }
  double layer_min_quality(int i) const { return ref_.min_quality(vertex_pos_[i]); }

  const PointLocator& layer_locator(int i) const;

private:
  Triangulation ref_;
  P2Space space_;
  const VelocityFieldSpec* field_;
  TimeGrid grid_;
  double dt_ode_;
  std::vector<std::vector<Vec2>> vertex_pos_;
  std::vector<std::vector<Vec2>> node_pos_;
  mutable std::vector<std::unique_ptr<PointLocator>> locators_;
};

/// Vertex positions of the mesh transported to layer `layer` of the flow map
/// (connectivity unchanged). Throws with the layer index on tangling.
std::vector<Vec2> transport_mesh(const Triangulation& mesh, const FlowMap& flow, int layer);

}  // namespace rheoshape
