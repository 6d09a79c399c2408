#pragma once

// Run configuration (YAML). Blocks: system, state, numerics, task, output and
// an optional manifest block written by previous runs. Unknown keys are
// errors. Sites are 1-based in the file and 0-based in the C++ API.
//
// Precedence: command-line flags > config file > built-in defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bhotoc/classical.hpp"
#include "bhotoc/model.hpp"
#include "bhotoc/otoc.hpp"
#include "bhotoc/quantum.hpp"
#include "bhotoc/sampling.hpp"
#include "bhotoc/sections.hpp"

namespace bhotoc {

inline constexpr const char* kVersion = "0.1.0";

enum class TaskKind { quantum_otoc, classical_otoc, cinf, lyapunov, poincare, strobo, families, validate };

std::string task_name(TaskKind k);
/// Parses the subcommand spelling, e.g. "quantum-otoc".
TaskKind parse_task(const std::string& s);

struct StateConfig {
  enum class Kind { coherent, fock, point };
  Kind kind = Kind::coherent;
  std::vector<double> occupations;
  std::vector<double> phases;  // empty means all zero
  std::vector<double> q, p;    // point

  /// Wigner sampler for the state (coherent or fock only).
  SamplerSpec sampler(std::uint64_t seed) const;
  /// Single phase-space point: the coherent centre, the Fock ring point at the
  /// given phases, or the explicit point.
  PhaseSpacePoint center() const;
  std::size_t sites() const;
};

struct BasisConfig {
  std::optional<BasisMode> mode;  // default: fixed_number unless a quadrature is involved
  std::optional<std::size_t> n_max;
};

struct NumericsConfig {
  PropagatorConfig propagator;
  FlowConfig flow;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  BasisConfig basis;
};

struct TimeGridConfig {
  std::optional<double> start, stop;
  std::optional<std::size_t> count;
  std::vector<double> values;

  std::vector<double> resolve() const;
};

struct TaskConfig {
  TaskKind kind = TaskKind::validate;
  Observable A, B;
  TimeGridConfig times;
  // lyapunov
  double horizon = 500.0;
  double renorm = 1.0;
  // cinf
  CinfConfig profile;
  // poincare
  double T = 1000.0;
  CrossingDirection direction = CrossingDirection::decreasing;
  // strobo
  std::size_t periods = 1000;
  // families
  double q0 = 0.0;
  double q_target = 0.0;
  double t = 0.03;
  FamilyConfig families;
  // validate
  bool quick = false;
};

struct RunConfig {
  std::optional<BoseHubbardParams> system;
  std::optional<StateConfig> state;
  NumericsConfig numerics;
  TaskConfig task;
  /// True when the file carried a task block.
  bool task_declared = false;
  std::filesystem::path output_directory = "out";

  /// Throws ConfigError on malformed input or unknown keys.
  static RunConfig parse(const std::string& yaml_text);
  static RunConfig load(const std::filesystem::path& path);
  /// Task-specific requirements: needed blocks, basis compatibility, site ranges.
  void validate() const;
  /// Fully resolved config as YAML (without output.directory), with a
  /// manifest block carrying the code version. Parsing it back gives the
  /// same run.
  std::string manifest() const;
};

}  // namespace bhotoc
