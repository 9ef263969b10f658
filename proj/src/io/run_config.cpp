#include "rheoshape/io/run_config.hpp"

#include <fstream>
#include <sstream>

namespace rheoshape {

using nlohmann::json;

namespace {

Vec2 vec2_of(const json& j) { return Vec2(j.at(0).get<double>(), j.at(1).get<double>()); }
json json_of(const Vec2& v) { return json::array({v.x(), v.y()}); }

std::vector<VelocityBump> bumps_of(const json& j) {
  std::vector<VelocityBump> out;
  for (const auto& b : j) {
    VelocityBump vb;
    vb.center = vec2_of(b.at("center"));
    vb.radius = b.at("radius").get<double>();
    vb.time_poly = b.at("time_poly").get<std::vector<double>>();
    out.push_back(std::move(vb));
  }
  return out;
}

json json_of(const std::vector<VelocityBump>& bumps) {
  json out = json::array();
  for (const auto& b : bumps)
    out.push_back({{"center", json_of(b.center)}, {"radius", b.radius}, {"time_poly", b.time_poly}});
  return out;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CertificationError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CertificationError(std::string("config: parse error: ") + e.what());
  }
  return from_json(j);
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion)
      throw CertificationError("config: unsupported schema_version " + std::to_string(version));
    c.seed = j.value("seed", 1ull);
    c.out_dir = j.value("out_dir", std::string("out"));
    c.threads = j.value("threads", 1);

    const auto& ha = j.at("hold_all");
    const auto& box = ha.at("box");
    c.hold_all = HoldAll(Vec2(box.at(0), box.at(1)), Vec2(box.at(2), box.at(3)),
                         ha.at("horizon").get<double>());

    const auto& dom = j.at("domain");
    c.domain_center = vec2_of(dom.at("center"));
    c.r0 = dom.at("r0").get<double>();
    c.cos_coeffs = dom.value("cos", std::vector<double>{});
    c.sin_coeffs = dom.value("sin", std::vector<double>{});
    c.r_min = dom.at("r_min").get<double>();
    c.r_max = dom.at("r_max").get<double>();
    c.lip_bound = dom.at("lip_bound").get<double>();
    c.boundary_samples = dom.value("boundary_samples", 256);

    const auto& vel = j.at("velocity");
    c.c_v = vel.at("c_v").get<double>();
    c.bumps = bumps_of(vel.value("bumps", json::array()));

    const auto& rh = j.at("rheology");
    c.rheology = RheologyParams(rh.at("q").get<double>(), rh.at("p").get<double>(),
                                rh.value("m_schedule", std::vector<double>{}));

    if (j.contains("hemolysis")) {
      const auto& he = j.at("hemolysis");
      c.hemolysis.emplace(he.at("c_h").get<double>(), he.at("alpha").get<double>(),
                          he.at("beta").get<double>(), he.at("r").get<double>(), c.rheology);
    }

    const auto& so = j.at("solver");
    c.dt = so.at("dt").get<double>();
    c.picard_max = so.value("picard_max", 40);
    c.picard_tol = so.value("picard_tol", 1e-10);
    c.dt_ode = so.value("dt_ode", 1e-3);
    c.h_target = so.at("h_target").get<double>();
    c.quality_floor = so.value("quality_floor", 0.05);
    c.ensemble = so.value("ensemble", 1);

    const std::string kind = j.value("functional", json({{"kind", "hemolysis_r"}}))
                                 .value("kind", std::string("hemolysis_r"));
    if (kind == "hemolysis_r")
      c.functional_kind = FunctionalKind::hemolysis_r;
    else if (kind == "dissipation")
      c.functional_kind = FunctionalKind::dissipation;
    else if (kind == "tracking")
      c.functional_kind = FunctionalKind::tracking;
    else
      throw CertificationError("config: unknown functional kind " + kind);

    if (j.contains("initial")) {
      const auto& init = j.at("initial");
      const std::string mode = init.value("mode", std::string("match_field"));
      if (mode == "match_field")
        c.init_mode = InitialData::Mode::match_field;
      else if (mode == "perturbed")
        c.init_mode = InitialData::Mode::perturbed;
      else
        throw CertificationError("config: unknown initial mode " + mode);
      c.init_perturbation = bumps_of(init.value("perturbation", json::array()));
    }

    if (j.contains("optimizer")) {
      const auto& op = j.at("optimizer");
      auto& o = c.optimizer;
      o.budget = op.value("budget", 200l);
      o.starts = op.value("starts", 8);
      o.simplex_scale = op.value("simplex_scale", 0.1);
      o.penalty_weight = op.value("penalty_weight", 1e3);
      o.fourier_cos = op.value("fourier_cos", 2);
      o.fourier_sin = op.value("fourier_sin", 2);
      o.time_poly_len = op.value("time_poly_len", 1);
      o.synthetic = op.value("synthetic", std::string("none"));
      o.synthetic_target = op.value("synthetic_target", M_PI);
      o.time_layers = op.value("time_layers", 11);
      o.h_target = op.value("h_target", 0.2);
      if (op.contains("bump_centers")) {
        o.bump_centers.clear();
        for (const auto& v : op.at("bump_centers")) o.bump_centers.push_back(vec2_of(v));
        o.bump_radii = op.at("bump_radii").get<std::vector<double>>();
      }
      if (o.synthetic != "none" && o.synthetic != "disk_radius" && o.synthetic != "area_tracking")
        throw CertificationError("config: unknown synthetic mode " + o.synthetic);
    }
  } catch (const json::exception& e) {
    throw CertificationError(std::string("config: ") + e.what());
  }

  // Cross-section validity: build each certified object once.
  c.make_domain();
  c.make_field();
  if (c.functional_kind == FunctionalKind::hemolysis_r && !c.hemolysis)
    throw CertificationError("config: hemolysis functional requires a hemolysis section");
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["threads"] = threads;
  j["hold_all"] = {{"box", {hold_all.lo.x(), hold_all.lo.y(), hold_all.hi.x(), hold_all.hi.y()}},
                   {"horizon", hold_all.horizon}};
  j["domain"] = {{"center", json_of(domain_center)},
                 {"r0", r0},
                 {"cos", cos_coeffs},
                 {"sin", sin_coeffs},
                 {"r_min", r_min},
                 {"r_max", r_max},
                 {"lip_bound", lip_bound},
                 {"boundary_samples", boundary_samples}};
  j["velocity"] = {{"c_v", c_v}, {"bumps", json_of(bumps)}};
  j["rheology"] = {{"q", rheology.q}, {"p", rheology.p}, {"m_schedule", rheology.m_schedule}};
  if (hemolysis)
    j["hemolysis"] = {{"c_h", hemolysis->c_h},
                      {"alpha", hemolysis->alpha},
                      {"beta", hemolysis->beta},
                      {"r", hemolysis->r}};
  j["solver"] = {{"dt", dt},           {"picard_max", picard_max}, {"picard_tol", picard_tol},
                 {"dt_ode", dt_ode},   {"h_target", h_target},     {"quality_floor", quality_floor},
                 {"ensemble", ensemble}};
  const char* kind = functional_kind == FunctionalKind::hemolysis_r ? "hemolysis_r"
                     : functional_kind == FunctionalKind::dissipation ? "dissipation"
                                                                      : "tracking";
  j["functional"] = {{"kind", kind}};
  j["initial"] = {{"mode", init_mode == InitialData::Mode::match_field ? "match_field" : "perturbed"},
                  {"perturbation", json_of(init_perturbation)}};
  json cent = json::array();
  for (const auto& v : optimizer.bump_centers) cent.push_back(json_of(v));
  j["optimizer"] = {{"budget", optimizer.budget},
                    {"starts", optimizer.starts},
                    {"simplex_scale", optimizer.simplex_scale},
                    {"penalty_weight", optimizer.penalty_weight},
                    {"fourier_cos", optimizer.fourier_cos},
                    {"fourier_sin", optimizer.fourier_sin},
                    {"time_poly_len", optimizer.time_poly_len},
                    {"bump_centers", cent},
                    {"bump_radii", optimizer.bump_radii},
                    {"synthetic", optimizer.synthetic},
                    {"synthetic_target", optimizer.synthetic_target},
                    {"time_layers", optimizer.time_layers},
                    {"h_target", optimizer.h_target}};
  return j;
}

DomainSpec RunConfig::make_domain() const {
  return DomainSpec(domain_center, r0, cos_coeffs, sin_coeffs, r_min, r_max, lip_bound, hold_all);
}

VelocityFieldSpec RunConfig::make_field() const {
  return VelocityFieldSpec(bumps, c_v, hold_all);
}

TimeGrid RunConfig::make_grid() const {
  const int steps = static_cast<int>(std::lround(hold_all.horizon / dt));
  if (steps < 1 || std::abs(steps * dt - hold_all.horizon) > 1e-9 * hold_all.horizon)
    throw CertificationError("config: dt must divide the horizon");
  return TimeGrid{0.0, hold_all.horizon, steps + 1};
}

SolverConfig RunConfig::make_solver_config() const {
  SolverConfig s;
  s.dt = make_grid().dt();
  s.picard_max = picard_max;
  s.picard_tol = picard_tol;
  s.dt_ode = dt_ode;
  return s;
}

InitialData RunConfig::make_initial() const {
  InitialData init;
  init.mode = init_mode;
  init.perturbation = init_perturbation;
  return init;
}

FunctionalSpec RunConfig::make_functional() const {
  FunctionalSpec spec;
  spec.kind = functional_kind;
  if (functional_kind == FunctionalKind::hemolysis_r) spec.hemolysis = hemolysis;
  if (functional_kind == FunctionalKind::tracking)
    spec.target = [](double, const Vec2&) { return Vec2::Zero(); };
  return spec;
}

ShapeProblem RunConfig::make_shape_problem() const {
  ShapeProblem p;
  p.layout.fourier_cos = optimizer.fourier_cos;
  p.layout.fourier_sin = optimizer.fourier_sin;
  p.layout.time_poly_len = optimizer.time_poly_len;
  p.layout.bump_centers = optimizer.bump_centers;
  p.layout.bump_radii = optimizer.bump_radii;
  p.layout.center = domain_center;
  p.layout.r_min = r_min;
  p.layout.r_max = r_max;
  p.layout.lip_bound = lip_bound;
  p.layout.c_v = c_v;
  p.hold_all = hold_all;
  p.rheology = rheology;
  p.functional = make_functional();
  p.init = make_initial();
  p.solver = make_solver_config();
  p.h_target = optimizer.h_target;
  p.time_layers = optimizer.time_layers;
  p.quality_floor = quality_floor;
  p.ensemble_size = ensemble;
  p.penalty_weight = optimizer.penalty_weight;
  if (optimizer.synthetic == "disk_radius")
    p.synthetic = ShapeProblem::Synthetic::disk_radius;
  else if (optimizer.synthetic == "area_tracking")
    p.synthetic = ShapeProblem::Synthetic::area_tracking;
  p.synthetic_target = optimizer.synthetic_target;
  return p;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

std::string RunConfig::config_hash() const { return fnv1a_hex(to_json().dump()); }

}  // namespace rheoshape
