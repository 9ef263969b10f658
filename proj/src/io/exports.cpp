#include "rheoshape/io/exports.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace rheoshape {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("io: cannot write " + tmp);
    out << content;
    if (!out.good()) throw NumericalError("io: short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_vtk_layer(const std::string& path, const Triangulation& tri,
                     const std::vector<Vec2>& pos, const Eigen::VectorXd& velocity,
                     const Eigen::VectorXd& pressure, const std::vector<double>* scalar,
                     const std::string& scalar_name) {
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\nlayer\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << tri.vertex_count() << " double\n";
  for (const Vec2& p : pos) out << fmt17(p.x()) << " " << fmt17(p.y()) << " 0\n";
  out << "CELLS " << tri.triangle_count() << " " << 4 * tri.triangle_count() << "\n";
  for (const auto& t : tri.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << tri.triangle_count() << "\n";
  for (int t = 0; t < tri.triangle_count(); ++t) out << "5\n";
  out << "POINT_DATA " << tri.vertex_count() << "\n";
  out << "VECTORS velocity double\n";
  for (int v = 0; v < tri.vertex_count(); ++v)
    out << fmt17(velocity[2 * v]) << " " << fmt17(velocity[2 * v + 1]) << " 0\n";
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < tri.vertex_count(); ++v) out << fmt17(pressure[v]) << "\n";
  if (scalar) {
    out << "SCALARS " << scalar_name << " double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < tri.vertex_count(); ++v) out << fmt17((*scalar)[v]) << "\n";
  }
  write_text_atomic(path, out.str());
}

void write_boundary_csv(const std::string& path, const MovingDomain& md) {
  std::ostringstream out;
  out << "t,vertex_index,x,y\n";
  for (int layer = 0; layer < md.layer_count(); ++layer) {
    const auto& poly = md.layer_boundary(layer);
    for (std::size_t i = 0; i < poly.size(); ++i)
      out << fmt17(md.layer_time(layer)) << "," << i << "," << fmt17(poly[i].x()) << ","
          << fmt17(poly[i].y()) << "\n";
  }
  write_text_atomic(path, out.str());
}

void write_energy_csv(const std::string& path, const EnergyLedger& ledger) {
  std::ostringstream out;
  out << "t,kinetic,diss_q,diss_p,scheme_dissipation,convective_exchange,work_force,"
         "viscous_lift,mesh_work,numerical_diss,balance_residual\n";
  for (const auto& r : ledger.rows) {
    out << fmt17(r.t) << "," << fmt17(r.kinetic) << "," << fmt17(r.diss_q) << ","
        << fmt17(r.diss_p) << "," << fmt17(r.scheme_dissipation) << ","
        << fmt17(r.convective_exchange) << "," << fmt17(r.work_force) << ","
        << fmt17(r.viscous_lift) << "," << fmt17(r.mesh_work) << "," << fmt17(r.numerical_diss)
        << "," << fmt17(r.balance_residual) << "\n";
  }
  write_text_atomic(path, out.str());
}

void write_node_csv(const std::string& path, const MovingMesh& mesh, const FlowState& state) {
  std::ostringstream out;
  out << "layer,t,node,x,y,u,v\n";
  for (int layer = 0; layer < mesh.layer_count(); ++layer) {
    const auto& pos = mesh.layer_vertices(layer);
    for (int n = 0; n < mesh.topology().vertex_count(); ++n) {
      out << layer << "," << fmt17(state.times[layer]) << "," << n << "," << fmt17(pos[n].x())
          << "," << fmt17(pos[n].y()) << "," << fmt17(state.velocity[layer][2 * n]) << ","
          << fmt17(state.velocity[layer][2 * n + 1]) << "\n";
    }
  }
  write_text_atomic(path, out.str());
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_of(const nlohmann::json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr.at(i).get<double>();
  return v;
}

}  // namespace

void write_state_json(const std::string& path, const FlowState& state) {
  nlohmann::json j;
  j["times"] = state.times;
  j["div_residual"] = state.div_residual;
  nlohmann::json w = nlohmann::json::array(), u = nlohmann::json::array(),
                 p = nlohmann::json::array();
  for (std::size_t i = 0; i < state.w.size(); ++i) {
    w.push_back(vector_json(state.w[i]));
    u.push_back(vector_json(state.velocity[i]));
    p.push_back(vector_json(state.pressure[i]));
  }
  j["w"] = std::move(w);
  j["velocity"] = std::move(u);
  j["pressure"] = std::move(p);
  write_text_atomic(path, j.dump());
}

FlowState read_state_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NumericalError("io: cannot open " + path);
  nlohmann::json j;
  in >> j;
  FlowState s;
  s.times = j.at("times").get<std::vector<double>>();
  s.div_residual = j.at("div_residual").get<std::vector<double>>();
  for (const auto& v : j.at("w")) s.w.push_back(vector_of(v));
  for (const auto& v : j.at("velocity")) s.velocity.push_back(vector_of(v));
  for (const auto& v : j.at("pressure")) s.pressure.push_back(vector_of(v));
  return s;
}

Manifest::Manifest(std::string config_hash) : config_hash_(std::move(config_hash)) {}

void Manifest::record_file(const std::string& path) { files_.push_back(path); }

void Manifest::record_timing(const std::string& stage, double seconds) {
  timings_.emplace_back(stage, seconds);
}

void Manifest::set(const std::string& key, const nlohmann::json& value) { extra_[key] = value; }

void Manifest::write(const std::string& path, double wall_seconds) const {
  nlohmann::json j;
  j["config_hash"] = config_hash_;
  j["schema_version"] = 1;
  j["wall_seconds"] = wall_seconds;
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [stage, sec] : timings_) t[stage] = sec;
  j["timings"] = t;
  j["files"] = files_;
  for (auto it = extra_.begin(); it != extra_.end(); ++it) j[it.key()] = it.value();
  write_text_atomic(path, j.dump(2));
}

}  // namespace rheoshape
