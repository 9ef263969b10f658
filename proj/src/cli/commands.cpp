#include "rheoshape/cli/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rheoshape/analysis/korn.hpp"
#include "rheoshape/analysis/projector.hpp"
#include "rheoshape/fem/mesh_gen.hpp"
#include "rheoshape/io/exports.hpp"
#include "rheoshape/io/run_config.hpp"

namespace rheoshape {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig load_with_overrides(const std::string& path, const CommonOptions& opts) {
  RunConfig cfg = RunConfig::load(path);
  if (const char* env = std::getenv("RHEOSHAPE_OUT_DIR")) cfg.out_dir = env;
  if (const char* env = std::getenv("RHEOSHAPE_THREADS")) cfg.threads = std::atoi(env);
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.threads) cfg.threads = *opts.threads;
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw NumericalError("io: cannot create " + dir + ": " + ec.message());
  const std::string probe = dir + "/.probe";
  std::ofstream out(probe);
  if (!out) throw NumericalError("io: out_dir not writable: " + dir);
  out.close();
  fs::remove(probe, ec);
}

/// Vertex-averaged damage index for export.
std::vector<double> hemolysis_vertex_field(const MovingMesh& mesh, int layer,
                                           const FlowState& state, const RunConfig& cfg) {
  const P2Space& space = mesh.space();
  const auto& pos = mesh.layer_vertices(layer);
  const double t = mesh.layer_time(layer);
  const VelocityFieldSpec field = cfg.make_field();
  std::vector<double> acc(mesh.topology().vertex_count(), 0.0);
  std::vector<int> count(mesh.topology().vertex_count(), 0);
  const Eigen::Vector3d corners[3] = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
                                      Eigen::Vector3d(0, 0, 1)};
  for (int tr = 0; tr < mesh.topology().triangle_count(); ++tr) {
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.topology().triangles[tr][k];
      const Mat2 g = eval_velocity_gradient(space, tr, corners[k], pos, state.w[layer]) +
                     field.gradient(t, pos[v]);
      const Mat2 du = 0.5 * (g + g.transpose());
      const double s_norm = power_law_viscosity(du.norm(), cfg.rheology.q) * du.norm();
      acc[v] += cfg.hemolysis ? hemolysis_index(s_norm, t, *cfg.hemolysis) : 0.0;
      count[v] += 1;
    }
  }
  for (std::size_t v = 0; v < acc.size(); ++v)
    if (count[v]) acc[v] /= count[v];
  return acc;
}

struct SimulationArtifacts {
  std::unique_ptr<MovingMesh> mesh;
  std::unique_ptr<MovingDomain> domain;
  EnsembleResult ensemble;
};

SimulationArtifacts run_simulation(const RunConfig& cfg) {
  SimulationArtifacts art;
  const DomainSpec domain = cfg.make_domain();
  const VelocityFieldSpec field = cfg.make_field();
  const TimeGrid grid = cfg.make_grid();
  const Triangulation ref = build_reference_mesh(domain, cfg.h_target);
  art.mesh = std::make_unique<MovingMesh>(ref, field, grid, cfg.dt_ode, cfg.quality_floor,
                                          &cfg.hold_all);
  art.domain =
      std::make_unique<MovingDomain>(domain, field, grid, cfg.dt_ode, cfg.boundary_samples);
  std::vector<EnsembleMember> members(std::max(1, cfg.ensemble));
  for (std::size_t i = 0; i < members.size(); ++i) {
    members[i].cfg = cfg.make_solver_config();
    members[i].cfg.seed_id = static_cast<int>(i);
  }
  art.ensemble = solve_ensemble(*art.mesh, field, cfg.rheology, cfg.make_initial(), nullptr,
                                members, cfg.threads);
  return art;
}

void export_simulation(const RunConfig& cfg, const SimulationArtifacts& art, Manifest& manifest) {
  const std::string dir = cfg.out_dir;
  const MovingMesh& mesh = *art.mesh;
  const ForwardResult& primary = art.ensemble.results.front();

  for (int layer = 0; layer < mesh.layer_count(); ++layer) {
    const std::string path = dir + "/layer_" + std::to_string(layer) + ".vtk";
    std::vector<double> hemo;
    if (cfg.hemolysis) hemo = hemolysis_vertex_field(mesh, layer, primary.state, cfg);
    Eigen::VectorXd vertex_vel(2 * mesh.topology().vertex_count());
    vertex_vel = primary.state.velocity[layer].head(2 * mesh.topology().vertex_count());
    write_vtk_layer(path, mesh.topology(), mesh.layer_vertices(layer), vertex_vel,
                    primary.state.pressure[layer], cfg.hemolysis ? &hemo : nullptr);
    manifest.record_file(path);
  }
  write_boundary_csv(dir + "/boundary.csv", *art.domain);
  manifest.record_file(dir + "/boundary.csv");
  write_energy_csv(dir + "/energy.csv", primary.ledger);
  manifest.record_file(dir + "/energy.csv");
  write_node_csv(dir + "/nodes.csv", mesh, primary.state);
  manifest.record_file(dir + "/nodes.csv");
  write_state_json(dir + "/state.json", primary.state);
  manifest.record_file(dir + "/state.json");

  json summary;
  summary["config_hash"] = cfg.config_hash();
  summary["layers"] = mesh.layer_count();
  summary["ensemble_members"] = art.ensemble.results.size();
  summary["warnings"] = art.ensemble.warnings;
  double max_div = 0.0, max_w = 0.0;
  for (std::size_t i = 0; i < primary.state.w.size(); ++i) {
    max_div = std::max(max_div, primary.state.div_residual[i]);
    max_w = std::max(max_w, primary.state.w[i].norm());
  }
  summary["max_div_residual"] = max_div;
  summary["max_w_coeff_norm"] = max_w;
  summary["max_energy_residual"] = primary.ledger.max_relative_residual(mesh.grid().dt());
  summary["final_m"] = std::isfinite(primary.final_m) ? json(primary.final_m) : json("inf");
  write_text_atomic(dir + "/summary.json", summary.dump(2));
  manifest.record_file(dir + "/summary.json");
}

int classified_failure(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << "\n";
  return code;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const CommonOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    cfg = load_with_overrides(config_path, opts);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitConfig);
  }
  try {
    ensure_out_dir(cfg.out_dir);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitIo);
  }
  Manifest manifest(cfg.config_hash());
  SimulationArtifacts art;
  try {
    const auto ts = std::chrono::steady_clock::now();
    art = run_simulation(cfg);
    manifest.record_timing("solve", seconds_since(ts));
  } catch (const std::exception& e) {
    return classified_failure(e, kExitSolver);
  }
  try {
    const auto te = std::chrono::steady_clock::now();
    export_simulation(cfg, art, manifest);
    manifest.record_timing("export", seconds_since(te));
    manifest.write(cfg.out_dir + "/manifest.json", seconds_since(t0));
  } catch (const std::exception& e) {
    return classified_failure(e, kExitIo);
  }
  return kExitOk;
}

int cmd_optimize(const std::string& config_path, const CommonOptions& opts, bool resume) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    cfg = load_with_overrides(config_path, opts);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitConfig);
  }
  try {
    ensure_out_dir(cfg.out_dir);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitIo);
  }

  try {
    const ShapeProblem problem = cfg.make_shape_problem();
    MinimizeConfig mc;
    mc.budget = cfg.optimizer.budget;
    mc.starts = cfg.optimizer.starts;
    mc.simplex_scale = cfg.optimizer.simplex_scale;
    mc.penalty_weight = cfg.optimizer.penalty_weight;
    mc.seed = cfg.seed;
    // Search stays sequential for any thread count; parallelism lives in the
    // per-candidate ensemble, which merges deterministically.
    mc.threads = problem.synthetic == ShapeProblem::Synthetic::none ? 1 : cfg.threads;

    double prev_best = std::numeric_limits<double>::infinity();
    const std::string best_path = cfg.out_dir + "/best.json";
    if (resume && fs::exists(best_path)) {
      std::ifstream in(best_path);
      json jb;
      in >> jb;
      const auto xv = jb.at("x").get<std::vector<double>>();
      Eigen::VectorXd x(xv.size());
      for (std::size_t i = 0; i < xv.size(); ++i) x[i] = xv[i];
      mc.warm_start = x;
      prev_best = jb.at("value").get<double>();
    }

    // Sequential search: a plain mutable incumbent is safe and deterministic.
    double best_known = std::numeric_limits<double>::infinity();
    ShapeProblem threaded = problem;
    auto objective = [&](const Eigen::VectorXd& x) {
      const ObjectiveOutcome o = shape_objective(threaded, x, best_known);
      if (o.feasible && !o.solver_failed) best_known = std::min(best_known, o.value);
      return o.value;
    };
    auto feasible = [&](const Eigen::VectorXd& x) {
      return decode(problem.layout, x, problem.hold_all).violation == 0.0;
    };

    const OptimizerState state = minimize(objective, problem.layout.default_bounds(), mc,
                                          shape_diagnostics(problem), feasible);
    if (resume && state.best_value > prev_best)
      throw NumericalError("optimize: resumed run worsened the best value");

    // history CSV (appended on resume)
    {
      std::ostringstream out;
      const std::string hist_path = cfg.out_dir + "/history.csv";
      const bool append = resume && fs::exists(hist_path);
      if (append) {
        std::ifstream in(hist_path);
        out << in.rdbuf();
      } else {
        out << "evaluations,value,hausdorff_to_prev,c1_to_prev\n";
      }
      for (const auto& row : state.history)
        out << row.evaluations << "," << fmt17(row.value) << "," << fmt17(row.hausdorff_to_prev)
            << "," << fmt17(row.c1_to_prev) << "\n";
      write_text_atomic(hist_path, out.str());
    }

    json jb;
    jb["value"] = state.best_value;
    jb["feasible"] = state.best_feasible;
    jb["evaluations"] = state.evaluations;
    std::vector<double> xv(state.best_x.data(), state.best_x.data() + state.best_x.size());
    jb["x"] = xv;
    write_text_atomic(best_path, jb.dump(2));

    // best-shape boundary and, for solver-backed problems, the best solution
    const Decoded best = decode(problem.layout, state.best_x, cfg.hold_all);
    if (best.domain) {
      std::ostringstream out;
      out << "vertex_index,x,y\n";
      const auto poly = best.domain->boundary_polygon(cfg.boundary_samples);
      for (std::size_t i = 0; i < poly.size(); ++i)
        out << i << "," << fmt17(poly[i].x()) << "," << fmt17(poly[i].y()) << "\n";
      write_text_atomic(cfg.out_dir + "/best_boundary.csv", out.str());
    }
    if (problem.synthetic == ShapeProblem::Synthetic::none && best.domain && best.field) {
      const Triangulation ref = build_reference_mesh(*best.domain, problem.h_target);
      const TimeGrid grid{0.0, cfg.hold_all.horizon, problem.time_layers};
      MovingMesh mesh(ref, *best.field, grid, cfg.dt_ode, cfg.quality_floor, &cfg.hold_all);
      SolverConfig sc = cfg.make_solver_config();
      sc.dt = grid.dt();
      const ForwardResult fr =
          solve_forward(mesh, *best.field, cfg.rheology, cfg.make_initial(), nullptr, sc);
      for (int layer = 0; layer < mesh.layer_count(); ++layer) {
        Eigen::VectorXd vertex_vel =
            fr.state.velocity[layer].head(2 * mesh.topology().vertex_count());
        write_vtk_layer(cfg.out_dir + "/best_layer_" + std::to_string(layer) + ".vtk",
                        mesh.topology(), mesh.layer_vertices(layer), vertex_vel,
                        fr.state.pressure[layer]);
      }
    }

    Manifest manifest(cfg.config_hash());
    manifest.set("best_value", state.best_value);
    manifest.set("evaluations", state.evaluations);
    manifest.write(cfg.out_dir + "/manifest.json", seconds_since(t0));
    std::cout << "best value " << fmt17(state.best_value) << " after " << state.evaluations
              << " evaluations\n";
    return kExitOk;
  } catch (const CertificationError& e) {
    return classified_failure(e, kExitConfig);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitSolver);
  }
}

int cmd_hemolysis(const std::string& solution_dir, const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = RunConfig::load(config_path);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitConfig);
  }
  try {
    const FlowState state = read_state_json(solution_dir + "/state.json");
    const DomainSpec domain = cfg.make_domain();
    const VelocityFieldSpec field = cfg.make_field();
    const Triangulation ref = build_reference_mesh(domain, cfg.h_target);
    MovingMesh mesh(ref, field, cfg.make_grid(), cfg.dt_ode, cfg.quality_floor, &cfg.hold_all);
    const FunctionalSpec spec = cfg.make_functional();
    const FunctionalValue v =
        evaluate_functional(spec, mesh, field, {&state}, cfg.rheology);

    json out;
    out["value"] = v.value;
    out["ensemble_values"] = v.ensemble_values;
    std::cout << out.dump(2) << "\n";

    std::ostringstream csv;
    csv << "layer,t,contribution\n";
    for (std::size_t i = 0; i < v.breakdown.size(); ++i)
      csv << i << "," << fmt17(mesh.layer_time(static_cast<int>(i))) << ","
          << fmt17(v.breakdown[i]) << "\n";
    write_text_atomic(solution_dir + "/functional_breakdown.csv", csv.str());
    return kExitOk;
  } catch (const CertificationError& e) {
    return classified_failure(e, kExitConfig);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitSolver);
  }
}

int cmd_verify(const std::string& suite, const std::string& report_path) {
  json report;
  bool all_passed = true;
  const bool all = suite == "all";
  bool known = all;

  auto record = [&](const std::string& name, bool passed, json metrics) {
    metrics["passed"] = passed;
    report[name] = metrics;
    all_passed = all_passed && passed;
  };

  try {
    if (all || suite == "rheology") {
      known = true;
      bool ok = true;
      json m;
      for (double q : {1.3, 1.5, 1.9}) {
        for (int dim : {2, 3}) {
          RheologyParams rp(q, std::max(5.0, RheologyParams::p_floor(q)), {});
          const auto cert = certify_inequalities(rp, 100000, 42, dim);
          ok = ok && cert.passed;
          m["q" + std::to_string(q) + "_d" + std::to_string(dim)] = {
              {"coercivity_margin", cert.coercivity_margin},
              {"growth_margin", cert.growth_margin},
              {"monotonicity_min", cert.monotonicity_min}};
        }
      }
      record("rheology", ok, m);
    }
    if (all || suite == "bogovskii") {
      known = true;
      json m;
      bool ok = true;
      std::vector<double> constants;
      for (int n : {12, 16, 24}) {
        const Triangulation tri = build_square_mesh(n);
        Rng rng(11);
        Eigen::VectorXd f(tri.vertex_count());
        for (int i = 0; i < tri.vertex_count(); ++i) f[i] = rng.normal();
        f = remove_p1_mean(tri, tri.vertices, f);
        const auto res = bogovskii(f, tri, tri.vertices);
        ok = ok && res.div_residual <= 1e-10;
        constants.push_back(res.observed_constant);
      }
      const double drift = *std::max_element(constants.begin(), constants.end()) /
                           *std::min_element(constants.begin(), constants.end());
      m["constants"] = constants;
      m["drift"] = drift;
      record("bogovskii", ok && drift < 1.2, m);
    }
    if (all || suite == "korn") {
      known = true;
      const Triangulation tri = build_square_mesh(20);
      const auto res = korn_constant(tri, tri.vertices, 2.0);
      const bool ok = res.constant <= std::sqrt(2.0) + 1e-6 &&
                      res.constant >= std::sqrt(2.0) - 0.05 && res.identity_residual <= 1e-12;
      record("korn", ok,
             {{"constant", res.constant}, {"identity_residual", res.identity_residual}});
    }
    if (all || suite == "piola") {
      known = true;
      HoldAll box(Vec2(-2, -2), Vec2(2, 2), 0.5);
      DomainSpec disk(Vec2(0, 0), 1.0, {}, {}, 0.5, 1.5, 0.5, box);
      VelocityFieldSpec field({{Vec2(0, 0), 0.8, {0.3}}}, 1.0, box);
      const Triangulation ref = build_reference_mesh(disk, 0.15);
      MovingMesh mesh(ref, field, TimeGrid{0.0, 0.5, 6}, 1e-3, 0.05, &box);
      PiolaTransform piola(mesh);
      Rng rng(3);
      double worst = 0.0;
      auto u = [&](const Vec2& y) { return Vec2(std::sin(y.x()), std::cos(y.y())); };
      for (int k = 0; k < 50; ++k) {
        const double ang = rng.uniform(0.0, 2 * M_PI);
        const double rad = 0.6 * std::sqrt(rng.uniform());
        const Vec2 x(rad * std::cos(ang), rad * std::sin(ang));
        const double t = 0.4;
        auto forward = [&](const Vec2& xx) { return piola.pull_back_point(t, xx, u); };
        const Vec2 round = piola.push_forward_point(t, x, forward);
        worst = std::max(worst, (round - u(x)).norm());
      }
      record("piola", worst <= 1e-10, {{"round_trip", worst}});
    }
    if (all || suite == "projector") {
      known = true;
      HoldAll box(Vec2(-2, -2), Vec2(2, 2), 0.1);
      DomainSpec disk(Vec2(0, 0), 1.0, {}, {}, 0.5, 1.5, 0.5, box);
      VelocityFieldSpec field({{Vec2(0, 0), 0.6, {0.2}}}, 1.0, box);
      const Triangulation ref = build_reference_mesh(disk, 0.08);
      MovingMesh mesh(ref, field, TimeGrid{0.0, 0.1, 5}, 1e-3, 0.05, &box);
      PiolaTransform piola(mesh);
      // smooth solenoidal input supported inside the unit disk
      Eigen::VectorXd spatial = Eigen::VectorXd::Zero(mesh.space().velocity_dofs());
      {
        HoldAll wide(Vec2(-10, -10), Vec2(10, 10), 1.0);
        VelocityFieldSpec bump({{Vec2(0, 0), 0.55, {1.0}}}, 1e9, wide);
        const auto nodes = mesh.layer_nodes(0);
        for (int k = 0; k < mesh.space().node_count(); ++k) {
          const Vec2 v = bump.value(0.0, nodes[k]);
          spatial[2 * k] = v.x();
          spatial[2 * k + 1] = v.y();
        }
      }
      const TestField eta = TestField::from_reference(mesh, piola, spatial, {1.0, 0.0, -1.0});
      const auto res = project_solenoidal_testfield(eta, mesh, piola, 4);
      double max_div = *std::max_element(res.div_residual.begin(), res.div_residual.end());
      const bool ok = max_div <= 1e-10 && res.support_min_distance >= res.prescribed_collar;
      record("projector", ok,
             {{"max_div", max_div},
              {"support_min_distance", res.support_min_distance},
              {"prescribed_collar", res.prescribed_collar}});
    }
  } catch (const std::exception& e) {
    std::cerr << "verify: " << e.what() << "\n";
    record("exception", false, {{"what", e.what()}});
  }

  if (!known) {
    std::cerr << "verify: unknown suite '" << suite
              << "' (expected rheology|bogovskii|korn|piola|projector|all)\n";
    return kExitConfig;
  }
  try {
    write_text_atomic(report_path, report.dump(2));
  } catch (const std::exception& e) {
    return classified_failure(e, kExitIo);
  }
  std::cout << report.dump(2) << "\n";
  return all_passed ? kExitOk : kExitVerification;
}

int cmd_export(const std::string& solution_dir, const std::string& config_path,
               const std::string& what) {
  RunConfig cfg;
  try {
    cfg = RunConfig::load(config_path);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitConfig);
  }
  try {
    const FlowState state = read_state_json(solution_dir + "/state.json");
    const DomainSpec domain = cfg.make_domain();
    const VelocityFieldSpec field = cfg.make_field();
    const Triangulation ref = build_reference_mesh(domain, cfg.h_target);
    MovingMesh mesh(ref, field, cfg.make_grid(), cfg.dt_ode, cfg.quality_floor, &cfg.hold_all);
    if (what == "vtk") {
      for (int layer = 0; layer < mesh.layer_count(); ++layer) {
        Eigen::VectorXd vertex_vel =
            state.velocity[layer].head(2 * mesh.topology().vertex_count());
        write_vtk_layer(solution_dir + "/export_layer_" + std::to_string(layer) + ".vtk",
                        mesh.topology(), mesh.layer_vertices(layer), vertex_vel,
                        state.pressure[layer]);
      }
    } else if (what == "csv") {
      write_node_csv(solution_dir + "/export_nodes.csv", mesh, state);
    } else if (what == "boundary") {
      MovingDomain md(domain, field, cfg.make_grid(), cfg.dt_ode, cfg.boundary_samples);
      write_boundary_csv(solution_dir + "/export_boundary.csv", md);
    } else {
      std::cerr << "export: unknown target '" << what << "' (expected vtk|csv|boundary)\n";
      return kExitConfig;
    }
    return kExitOk;
  } catch (const CertificationError& e) {
    return classified_failure(e, kExitConfig);
  } catch (const std::exception& e) {
    return classified_failure(e, kExitIo);
  }
}

}  // namespace rheoshape
