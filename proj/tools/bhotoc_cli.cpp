#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "bhotoc/config.hpp"
#include "bhotoc/error.hpp"
#include "bhotoc/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum and quasiclassical OTOCs of small Bose-Hubbard lattices"};
  app.set_version_flag("--version", bhotoc::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> dt;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
  std::optional<bool> weyl;

  app.add_option("--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Sampler seed");
  app.add_option("--samples", samples, "Monte Carlo sample count");
  app.add_option("--dt", dt, "Integrator / propagator substep");
  app.add_option("--workers", workers, "Parallel workers (0 = all cores)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--weyl-corrected", weyl, "Use the Weyl symbol of H (true) or the bare mean-field energy (false)");

  const char* commands[][2] = {
      {"quantum-otoc", "Exact Fock-space OTOC"},
      {"classical-otoc", "Truncated-Wigner OTOC from tangent dynamics"},
      {"cinf", "Long-time quasiclassical OTOC limit"},
      {"lyapunov", "Largest Lyapunov exponent (Benettin)"},
      {"poincare", "Trimer Poincare section"},
      {"strobo", "Driven-dimer stroboscopic map"},
      {"families", "Trajectory families of the 1-DOF sqrt well"},
      {"validate", "Property suite"},
  };
  for (const auto& c : commands) app.add_subcommand(c[0], c[1]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    bhotoc::RunConfig cfg = config_path.empty() ? bhotoc::RunConfig{} : bhotoc::RunConfig::load(config_path);
    const auto kind = bhotoc::parse_task(command);
    if (cfg.task_declared && cfg.task.kind != kind)
      throw bhotoc::ConfigError("config task.kind is " + bhotoc::task_name(cfg.task.kind) + " but the subcommand is " +
                                command);
    cfg.task.kind = kind;
    if (seed) cfg.numerics.seed = *seed;
    if (samples) cfg.numerics.samples = *samples;
    if (dt) cfg.numerics.flow.dt = cfg.numerics.propagator.dt = *dt;
    if (workers) cfg.numerics.workers = *workers;
    if (weyl) cfg.numerics.flow.weyl_corrected = *weyl;
    if (out_dir) cfg.output_directory = *out_dir;

    const auto report = bhotoc::run_task(cfg, cfg.output_directory, std::cout);
    if (!report.passed) {
      std::cerr << "validation failed\n";
      return kExitValidation;
    }
    return 0;
  } catch (const bhotoc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bhotoc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
