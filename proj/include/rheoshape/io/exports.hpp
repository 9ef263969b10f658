#pragma once

#include <json.hpp>
#include <string>

#include "rheoshape/geometry/moving_domain.hpp"
#include "rheoshape/solver/solver.hpp"

namespace rheoshape {

/// 17-significant-digit formatting used for every exported field value, so
/// reruns are byte-comparable.
std::string fmt17(double v);

/// Legacy-ASCII VTK of one layer: vertex velocity/pressure point data and an
/// optional scalar field (e.g. the damage index).
void write_vtk_layer(const std::string& path, const Triangulation& tri,
                     const std::vector<Vec2>& pos, const Eigen::VectorXd& velocity,
                     const Eigen::VectorXd& pressure, const std::vector<double>* scalar = nullptr,
                     const std::string& scalar_name = "hemolysis");

/// Columns: t, vertex_index, x, y for every layer boundary polygon.
void write_boundary_csv(const std::string& path, const MovingDomain& md);

void write_energy_csv(const std::string& path, const EnergyLedger& ledger);

/// Per-layer nodal table of a flow state (vertex nodes only).
void write_node_csv(const std::string& path, const MovingMesh& mesh, const FlowState& state);

void write_state_json(const std::string& path, const FlowState& state);
FlowState read_state_json(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);

/// Run manifest: config hash, wall-clock, per-stage timings, and the output
/// inventory; written atomically at run end.
class Manifest {
public:
  explicit Manifest(std::string config_hash);

  void record_file(const std::string& path);
  void record_timing(const std::string& stage, double seconds);
  void set(const std::string& key, const nlohmann::json& value);

  /// Writes the manifest itself (not listed in its own inventory).
  void write(const std::string& path, double wall_seconds) const;

  const std::vector<std::string>& files() const { return files_; }

private:
  std::string config_hash_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, double>> timings_;
  nlohmann::json extra_;
};

}  // namespace rheoshape
