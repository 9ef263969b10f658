#include <CLI11.hpp>

#include "rheoshape/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "rheoshape: shear-thinning flow simulation and shape optimization in moving domains "
      "(config schema version 1)"};
  app.require_subcommand(1);

  std::string config_path, solution_dir, suite = "all", what = "vtk";
  std::string report_path = "verify_report.json";
  rheoshape::CommonOptions opts;
  std::string out_dir;
  int threads = 0;
  bool resume = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "override the output directory");
    cmd->add_option("--threads", threads,
                    "process-level parallelism (results are identical for any value)");
  };

  auto* sim = app.add_subcommand("simulate", "forward solve, exports, and manifest");
  sim->add_option("--config", config_path, "run configuration (JSON, schema v1)")->required();
  add_common(sim);

  auto* opt = app.add_subcommand("optimize", "derivative-free shape optimization");
  opt->add_option("--config", config_path, "run configuration (JSON, schema v1)")->required();
  opt->add_flag("--resume", resume, "continue from an existing history/best");
  add_common(opt);

  auto* hemo = app.add_subcommand("hemolysis", "evaluate the cost functional on a stored solution");
  hemo->add_option("--solution", solution_dir, "directory written by simulate")->required();
  hemo->add_option("--config", config_path, "run configuration (JSON, schema v1)")->required();

  auto* ver = app.add_subcommand("verify", "analysis and rheology certificate suites");
  ver->add_option("--suite", suite, "rheology|bogovskii|korn|piola|projector|all");
  ver->add_option("--report", report_path, "where to write the JSON report");

  auto* exp = app.add_subcommand("export", "re-export artifacts from a stored solution");
  exp->add_option("--solution", solution_dir, "directory written by simulate")->required();
  exp->add_option("--config", config_path, "run configuration (JSON, schema v1)")->required();
  exp->add_option("--what", what, "vtk|csv|boundary");

  CLI11_PARSE(app, argc, argv);

  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (threads > 0) opts.threads = threads;

  if (sim->parsed()) return rheoshape::cmd_simulate(config_path, opts);
  if (opt->parsed()) return rheoshape::cmd_optimize(config_path, opts, resume);
  if (hemo->parsed()) return rheoshape::cmd_hemolysis(solution_dir, config_path);
  if (ver->parsed()) return rheoshape::cmd_verify(suite, report_path);
  if (exp->parsed()) return rheoshape::cmd_export(solution_dir, config_path, what);
  return rheoshape::kExitConfig;
}
