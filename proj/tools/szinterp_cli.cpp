// Command line front end: identity verification, dual basis dumps, and the
// convergence studies.  Output is CSV for the studies and JSON for verify
// and dualbasis; the exit code is zero iff all declared checks pass.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "szinterp/experiments.hpp"
#include "szinterp/parallel.hpp"

namespace {

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-interpolation operators on negative Sobolev spaces"};
  app.require_subcommand(1);

  std::string config_path;
  bool serial = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_flag("--serial", serial, "run the serial reference kernels");

  szinterp::ExperimentConfig config;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--op", config.op, "operator: Pi0 | Pi | Pi0star | Pi2 | Clement");
    cmd->add_option("--d", config.d, "spatial dimension (1 or 2)");
    cmd->add_option("--k", config.k, "polynomial degree (1..3)");
    cmd->add_option("--levels", config.levels, "number of refinement levels");
    cmd->add_option("--preset", config.preset, "test input preset");
    cmd->add_option("--out", config.out, "output path (default stdout)");
    cmd->add_option("--mesh", config.mesh_file, "base mesh JSON file");
    cmd->add_option("--base-n", config.base_n, "elements of the built-in base mesh");
    cmd->add_option("--base-refines", config.base_refines,
                    "uniform refinements applied to the base mesh");
    cmd->add_option("--negnorm-refines", config.negnorm.extra_refines,
                    "extra refinements of the dual-norm evaluation mesh");
    cmd->add_option("--kt", config.kt, "time degree (spacetime)");
    cmd->add_option("--kx", config.kx, "space degree (spacetime)");
    cmd->add_option("--t-end", config.t_end, "final time (heat)");
    cmd->add_flag("--refine-space-only", config.refine_space_only,
                  "keep the time mesh fixed (spacetime)");
  };

  auto add_sub = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->fallthrough();
    return cmd;
  };

  CLI::App* verify = add_sub("verify", "run the identity suite");
  verify->add_option("--out", config.out, "output path (default stdout)");

  CLI::App* dualbasis = add_sub("dualbasis", "dump dual basis coefficients");
  dualbasis->add_option("--d", config.d, "spatial dimension");
  dualbasis->add_option("--k", config.k, "polynomial degree");
  dualbasis->add_option("--out", config.out, "output path (default stdout)");

  CLI::App* converge = add_sub("converge", "operator convergence study");
  add_common(converge);
  CLI::App* heat = add_sub("heat", "semi-discrete heat study");
  add_common(heat);
  CLI::App* smooth = add_sub("smooth", "right-hand-side smoothing study");
  add_common(smooth);
  CLI::App* spacetime = add_sub("spacetime", "tensor operator study");
  add_common(spacetime);

  app.preparse_callback([&](std::size_t) {
    // Load the config file first so explicit flags override it.
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        std::ifstream in(argv[i + 1]);
        if (!in) throw CLI::ValidationError("--config", "cannot open file");
        nlohmann::json j;
        in >> j;
        config = szinterp::config_from_json(j);
      }
    }
  });

  CLI11_PARSE(app, argc, argv);

  if (serial) szinterp::set_exec_mode(szinterp::ExecMode::Serial);

  try {
    if (verify->parsed()) {
      const nlohmann::json report = szinterp::run_verify();
      write_output(config.out, report.dump(2) + "\n");
      return report["all_pass"].get<bool>() ? 0 : 1;
    }
    if (dualbasis->parsed()) {
      write_output(config.out, szinterp::dump_dual_basis(config.d, config.k).dump(2) + "\n");
      return 0;
    }
    szinterp::RateTable table;
    if (converge->parsed()) table = szinterp::run_converge(config);
    if (heat->parsed()) table = szinterp::run_heat(config);
    if (smooth->parsed()) table = szinterp::run_smooth(config);
    if (spacetime->parsed()) table = szinterp::run_spacetime(config);
    write_output(config.out, table.to_csv());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
