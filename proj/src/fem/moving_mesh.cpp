#include "rheoshape/fem/moving_mesh.hpp"

#include <sstream>

namespace rheoshape {

MovingMesh::MovingMesh(Triangulation reference, const VelocityFieldSpec& field,
                       const TimeGrid& grid, double dt_ode, double quality_floor,
                       const HoldAll* hold_all)
    : ref_(std::move(reference)), space_(ref_), field_(&field), grid_(grid), dt_ode_(dt_ode) {
  std::vector<double> times(grid.layers);
  for (int i = 0; i < grid.layers; ++i) times[i] = grid.time(i);
  HoldAll box = hold_all ? *hold_all
                         : HoldAll(Vec2(-1e30, -1e30), Vec2(1e30, 1e30), grid.t_end > 0 ? grid.t_end : 1.0);
  FlowMap flow(field, ref_.vertices, times, dt_ode, box);

  vertex_pos_.resize(grid.layers);
  node_pos_.resize(grid.layers);
  locators_.resize(grid.layers);
  for (int i = 0; i < grid.layers; ++i) {
    vertex_pos_[i] = transport_mesh(ref_, flow, i);
    node_pos_[i] = space_.node_positions(vertex_pos_[i]);
    const double quality = ref_.min_quality(vertex_pos_[i]);
    if (quality < quality_floor) {
      std::ostringstream msg;
      msg << "MovingMesh: triangle quality " << quality << " below floor " << quality_floor
          << " at layer " << i;
      throw NumericalError(msg.str());
    }
  }
}

const PointLocator& MovingMesh::layer_locator(int i) const {
  if (!locators_[i]) locators_[i] = std::make_unique<PointLocator>(ref_, vertex_pos_[i]);
  return *locators_[i];
}

std::vector<Vec2> transport_mesh(const Triangulation& mesh, const FlowMap& flow, int layer) {
  if (flow.point_count() != mesh.vertex_count())
    throw NumericalError("transport_mesh: flow map was not built on the mesh vertices");
  std::vector<Vec2> pos = flow.layer_positions(layer);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (mesh.triangle_area(t, pos) <= 0.0) {
      std::ostringstream msg;
      msg << "transport_mesh: tangled (non-positive) triangle " << t << " at layer " << layer;
      throw NumericalError(msg.str());
    }
  }
  return pos;
}

}  // namespace rheoshape
