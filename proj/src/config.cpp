#include "bhotoc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bhotoc/error.hpp"

namespace bhotoc {

namespace {

const std::pair<TaskKind, const char*> kTaskNames[] = {
    {TaskKind::quantum_otoc, "quantum-otoc"}, {TaskKind::classical_otoc, "classical-otoc"},
    {TaskKind::cinf, "cinf"},                 {TaskKind::lyapunov, "lyapunov"},
    {TaskKind::poincare, "poincare"},         {TaskKind::strobo, "strobo"},
    {TaskKind::families, "families"},         {TaskKind::validate, "validate"},
};

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError("unknown key '" + where + "." + key + "' (allowed: " + list + ")");
    }
  }
}

template <class T>
T read(const YAML::Node& node, const std::string& key, const std::string& where) {
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": invalid value");
  }
}

template <class T>
void read_opt(const YAML::Node& node, const std::string& key, const std::string& where, T& out) {
  if (node[key]) out = read<T>(node, key, where);
}

std::vector<double> read_list(const YAML::Node& node, const std::string& key, const std::string& where) {
  if (!node[key].IsSequence()) throw ConfigError(where + "." + key + ": expected a list");
  return read<std::vector<double>>(node, key, where);
}

Observable read_observable(const YAML::Node& node, const std::string& where) {
  check_keys(node, {"kind", "site"}, where);
  if (!node["kind"]) throw ConfigError(where + ".kind is required");
  Observable o;
  o.kind = Observable::parse_kind(read<std::string>(node, "kind", where));
  if (o.kind == ObservableKind::total_number) {
    if (node["site"]) throw ConfigError(where + ".site: total_number takes no site");
    return o;
  }
  if (!node["site"]) throw ConfigError(where + ".site is required");
  const long site = read<long>(node, "site", where);
  if (site < 1) throw ConfigError(where + ".site is 1-based and must be >= 1");
  o.site = static_cast<std::size_t>(site - 1);
  return o;
}

BoseHubbardParams read_system(const YAML::Node& node) {
  check_keys(node, {"sites", "U", "J", "onsite", "drive"}, "system");
  BoseHubbardParams p;
  if (!node["sites"]) throw ConfigError("system.sites is required");
  const long sites = read<long>(node, "sites", "system");
  if (sites < 1) throw ConfigError("system.sites must be >= 1");
  p.sites = static_cast<std::size_t>(sites);
  read_opt(node, "U", "system", p.U);
  read_opt(node, "J", "system", p.J);
  if (node["onsite"]) p.onsite = read_list(node, "onsite", "system");
  if (node["drive"]) {
    const auto d = node["drive"];
    check_keys(d, {"amplitude", "omega"}, "system.drive");
    DimerDrive drive;
    read_opt(d, "amplitude", "system.drive", drive.amplitude);
    read_opt(d, "omega", "system.drive", drive.omega);
    p.drive = drive;
  }
  p.validate();
  return p;
}

StateConfig read_state(const YAML::Node& node) {
  check_keys(node, {"kind", "occupations", "phases", "q", "p"}, "state");
  StateConfig s;
  const auto kind = node["kind"] ? read<std::string>(node, "kind", "state") : std::string("coherent");
  if (kind == "coherent")
    s.kind = StateConfig::Kind::coherent;
  else if (kind == "fock")
    s.kind = StateConfig::Kind::fock;
  else if (kind == "point")
    s.kind = StateConfig::Kind::point;
  else
    throw ConfigError("state.kind must be coherent, fock or point");
  if (s.kind == StateConfig::Kind::point) {
    if (node["occupations"] || node["phases"]) throw ConfigError("state: a point takes q and p, not occupations");
    s.q = read_list(node, "q", "state");
    s.p = read_list(node, "p", "state");
    if (s.q.size() != s.p.size()) throw ConfigError("state: q and p differ in length");
  } else {
    if (node["q"] || node["p"]) throw ConfigError("state: q and p are only valid for kind: point");
    s.occupations = read_list(node, "occupations", "state");
    if (node["phases"]) s.phases = read_list(node, "phases", "state");
    if (!s.phases.empty() && s.phases.size() != s.occupations.size())
      throw ConfigError("state: phases and occupations differ in length");
    for (double n : s.occupations)
      if (!(n >= 0.0)) throw ConfigError("state: occupations must be >= 0");
    if (s.kind == StateConfig::Kind::fock)
      for (double n : s.occupations)
        if (n != std::floor(n)) throw ConfigError("state: Fock occupations must be integers");
  }
  return s;
}

void read_numerics(const YAML::Node& node, NumericsConfig& n) {
  check_keys(node,
             {"dt", "krylov_dim", "norm_tol", "leakage_tol", "krylov_tol", "samples", "seed", "workers",
              "weyl_corrected", "basis"},
             "numerics");
  if (node["dt"]) n.propagator.dt = n.flow.dt = read<double>(node, "dt", "numerics");
  read_opt(node, "krylov_dim", "numerics", n.propagator.krylov_dim);
  read_opt(node, "norm_tol", "numerics", n.propagator.norm_tol);
  read_opt(node, "leakage_tol", "numerics", n.propagator.leakage_tol);
  read_opt(node, "krylov_tol", "numerics", n.propagator.krylov_tol);
  read_opt(node, "samples", "numerics", n.samples);
  read_opt(node, "seed", "numerics", n.seed);
  read_opt(node, "workers", "numerics", n.workers);
  read_opt(node, "weyl_corrected", "numerics", n.flow.weyl_corrected);
  if (node["basis"]) {
    const auto b = node["basis"];
    check_keys(b, {"mode", "n_max"}, "numerics.basis");
    if (b["mode"]) {
      const auto m = read<std::string>(b, "mode", "numerics.basis");
      if (m == "fixed_number")
        n.basis.mode = BasisMode::fixed_number;
      else if (m == "truncated")
        n.basis.mode = BasisMode::truncated;
      else
        throw ConfigError("numerics.basis.mode must be fixed_number or truncated");
    }
    if (b["n_max"]) n.basis.n_max = read<std::size_t>(b, "n_max", "numerics.basis");
  }
}

TimeGridConfig read_times(const YAML::Node& node) {
  TimeGridConfig g;
  if (node.IsSequence()) {
    g.values = node.as<std::vector<double>>();
    return g;
  }
  check_keys(node, {"start", "stop", "count"}, "task.times");
  if (!node["stop"] || !node["count"]) throw ConfigError("task.times needs stop and count (start defaults to 0)");
  g.start = node["start"] ? read<double>(node, "start", "task.times") : 0.0;
  g.stop = read<double>(node, "stop", "task.times");
  g.count = read<std::size_t>(node, "count", "task.times");
  return g;
}

void read_profile(const YAML::Node& node, CinfConfig& c) {
  check_keys(node,
             {"n_traj", "horizon", "burn_in", "e_bins", "n_bins", "min_count", "derivative", "span", "cross_fit",
              "min_fit", "fd_stride", "broaden", "dt", "max_excluded"},
             "task.profile");
  read_opt(node, "n_traj", "task.profile", c.n_traj);
  read_opt(node, "horizon", "task.profile", c.horizon);
  read_opt(node, "burn_in", "task.profile", c.burn_in);
  read_opt(node, "e_bins", "task.profile", c.e_bins);
  read_opt(node, "n_bins", "task.profile", c.n_bins);
  read_opt(node, "min_count", "task.profile", c.min_count);
  if (node["derivative"]) {
    const auto d = read<std::string>(node, "derivative", "task.profile");
    if (d == "local_linear")
      c.derivative = ProfileDerivative::local_linear;
    else if (d == "finite_difference")
      c.derivative = ProfileDerivative::finite_difference;
    else
      throw ConfigError("task.profile.derivative must be local_linear or finite_difference");
  }
  read_opt(node, "span", "task.profile", c.span);
  read_opt(node, "cross_fit", "task.profile", c.cross_fit);
  read_opt(node, "min_fit", "task.profile", c.min_fit);
  read_opt(node, "fd_stride", "task.profile", c.fd_stride);
  read_opt(node, "broaden", "task.profile", c.broaden);
  read_opt(node, "dt", "task.profile", c.dt);
  read_opt(node, "max_excluded", "task.profile", c.max_excluded);
  c.validate();
}

void read_task(const YAML::Node& node, TaskConfig& t) {
  if (!node["kind"]) throw ConfigError("task.kind is required");
  t.kind = parse_task(read<std::string>(node, "kind", "task"));
  switch (t.kind) {
    case TaskKind::quantum_otoc:
    case TaskKind::classical_otoc:
      check_keys(node, {"kind", "A", "B", "times"}, "task");
      if (!node["A"] || !node["B"] || !node["times"]) throw ConfigError("task needs A, B and times");
      t.A = read_observable(node["A"], "task.A");
      t.B = read_observable(node["B"], "task.B");
      t.times = read_times(node["times"]);
      break;
    case TaskKind::cinf:
      check_keys(node, {"kind", "A", "B", "profile"}, "task");
      if (!node["A"] || !node["B"]) throw ConfigError("task needs A and B");
      t.A = read_observable(node["A"], "task.A");
      t.B = read_observable(node["B"], "task.B");
      if (node["profile"]) read_profile(node["profile"], t.profile);
      break;
    case TaskKind::lyapunov:
      check_keys(node, {"kind", "horizon", "renorm"}, "task");
      read_opt(node, "horizon", "task", t.horizon);
      read_opt(node, "renorm", "task", t.renorm);
      break;
    case TaskKind::poincare: {
      check_keys(node, {"kind", "T", "direction"}, "task");
      read_opt(node, "T", "task", t.T);
      if (node["direction"]) {
        const auto d = read<std::string>(node, "direction", "task");
        if (d == "decreasing")
          t.direction = CrossingDirection::decreasing;
        else if (d == "increasing")
          t.direction = CrossingDirection::increasing;
        else
          throw ConfigError("task.direction must be decreasing or increasing");
      }
      break;
    }
    case TaskKind::strobo:
      check_keys(node, {"kind", "periods"}, "task");
      read_opt(node, "periods", "task", t.periods);
      break;
    case TaskKind::families:
      check_keys(node, {"kind", "q0", "q_target", "t", "p_min", "p_max", "steps", "root_tol"}, "task");
      read_opt(node, "q0", "task", t.q0);
      read_opt(node, "q_target", "task", t.q_target);
      read_opt(node, "t", "task", t.t);
      read_opt(node, "p_min", "task", t.families.p_min);
      read_opt(node, "p_max", "task", t.families.p_max);
      read_opt(node, "steps", "task", t.families.steps);
      read_opt(node, "root_tol", "task", t.families.root_tol);
      break;
    case TaskKind::validate:
      check_keys(node, {"kind", "quick"}, "task");
      read_opt(node, "quick", "task", t.quick);
      break;
  }
}

void emit_observable(YAML::Emitter& e, const char* key, const Observable& o) {
  static const char* names[] = {"number", "q", "p", "number_squared", "p_squared", "total_number"};
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << names[static_cast<int>(o.kind)];
  if (o.kind != ObservableKind::total_number) e << YAML::Key << "site" << YAML::Value << o.site + 1;
  e << YAML::EndMap;
}

void emit_list(YAML::Emitter& e, const char* key, const std::vector<double>& v) {
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double x : v) e << x;
  e << YAML::EndSeq;
}

}  // namespace

std::string task_name(TaskKind k) {
  for (const auto& [kind, name] : kTaskNames)
    if (kind == k) return name;
  return "?";
}

TaskKind parse_task(const std::string& s) {
  for (const auto& [kind, name] : kTaskNames)
    if (s == name) return kind;
  throw ConfigError("unknown task '" + s + "'");
}

std::size_t StateConfig::sites() const { return kind == Kind::point ? q.size() : occupations.size(); }

SamplerSpec StateConfig::sampler(std::uint64_t seed) const {
  if (kind == Kind::coherent) {
    std::vector<double> ph = phases.empty() ? std::vector<double>(occupations.size(), 0.0) : phases;
    return SamplerSpec::coherent(coherent_amplitudes(occupations, ph), seed);
  }
  if (kind == Kind::fock) return SamplerSpec::fock_ring(occupations, seed);
  throw ConfigError("state: a single point cannot be sampled; use coherent or fock");
}

PhaseSpacePoint StateConfig::center() const {
  if (kind == Kind::point) return PhaseSpacePoint::from_qp(q, p);
  const std::size_t L = occupations.size();
  PhaseSpacePoint x(L);
  for (std::size_t l = 0; l < L; ++l) {
    const double th = phases.empty() ? 0.0 : phases[l];
    const double r = kind == Kind::coherent ? kCoherentEpsilon * std::sqrt(occupations[l])
                                            : std::sqrt(2.0 * occupations[l] + 1.0);
    x.q(l) = r * std::cos(th);
    x.p(l) = r * std::sin(th);
  }
  return x;
}

std::vector<double> TimeGridConfig::resolve() const {
  std::vector<double> g = values.empty() ? linear_grid(start.value_or(0.0), stop.value_or(0.0), count.value_or(0))
                                         : values;
  check_time_grid(g);
  return g;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (root.IsNull()) return c;
  try {
    check_keys(root, {"system", "state", "numerics", "task", "output", "manifest"}, "config");
    if (root["system"]) c.system = read_system(root["system"]);
    if (root["state"]) c.state = read_state(root["state"]);
    if (root["numerics"]) read_numerics(root["numerics"], c.numerics);
    if (root["task"]) {
      read_task(root["task"], c.task);
      c.task_declared = true;
    }
    if (root["output"]) {
      check_keys(root["output"], {"directory"}, "output");
      if (root["output"]["directory"]) c.output_directory = read<std::string>(root["output"], "directory", "output");
    }
    if (root["manifest"]) check_keys(root["manifest"], {"version", "command"}, "manifest");
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::validate() const {
  const TaskKind k = task.kind;
  numerics.flow.validate();
  numerics.propagator.validate();
  if (k == TaskKind::validate || k == TaskKind::families) {
    if (k == TaskKind::families) task.families.validate();
    return;
  }
  if (!system) throw ConfigError("task " + task_name(k) + " needs a system block");
  if (!state) throw ConfigError("task " + task_name(k) + " needs a state block");
  system->validate();
  if (state->sites() != system->sites)
    throw ConfigError("state has " + std::to_string(state->sites()) + " sites, system has " +
                      std::to_string(system->sites));

  auto check_site = [&](const Observable& o, const char* which) {
    if (o.kind != ObservableKind::total_number && o.site >= system->sites)
      throw ConfigError(std::string("task.") + which + ".site exceeds system.sites");
  };
  switch (k) {
    case TaskKind::quantum_otoc: {
      check_site(task.A, "A");
      check_site(task.B, "B");
      task.times.resolve();
      if (state->kind == StateConfig::Kind::point) throw ConfigError("quantum-otoc needs a coherent or fock state");
      const bool quadrature = !task.A.conserves_number() || !task.B.conserves_number();
      const BasisMode mode = numerics.basis.mode.value_or(quadrature ? BasisMode::truncated : BasisMode::fixed_number);
      if (quadrature && mode == BasisMode::fixed_number)
        throw ConfigError("quadrature observables need numerics.basis.mode: truncated");
      if (mode == BasisMode::truncated && !numerics.basis.n_max)
        throw ConfigError("numerics.basis.n_max is required for a truncated basis");
      if (mode == BasisMode::fixed_number && state->kind == StateConfig::Kind::coherent) {
        double n = 0.0;
        for (double v : state->occupations) n += v;
        if (n != std::floor(n))
          throw ConfigError("fixed_number basis: coherent occupations must sum to an integer N");
      }
      break;
    }
    case TaskKind::classical_otoc:
    case TaskKind::cinf:
      check_site(task.A, "A");
      check_site(task.B, "B");
      if (k == TaskKind::classical_otoc) task.times.resolve();
      if (k == TaskKind::cinf) task.profile.validate();
      if (numerics.samples < 2) throw ConfigError("numerics.samples must be >= 2");
      state->sampler(numerics.seed).validate();
      break;
    case TaskKind::lyapunov:
      if (!(task.renorm > 0.0) || !(task.horizon > task.renorm))
        throw ConfigError("lyapunov: requires horizon > renorm > 0");
      break;
    case TaskKind::poincare:
      if (system->sites != 3 || !system->autonomous()) throw ConfigError("poincare needs an undriven trimer");
      if (task.T == 0.0) throw ConfigError("poincare: T must be nonzero");
      break;
    case TaskKind::strobo:
      if (system->sites != 2 || !system->drive) throw ConfigError("strobo needs a driven dimer (system.drive)");
      if (task.periods < 1) throw ConfigError("strobo: periods must be >= 1");
      break;
    default: break;
  }
}

std::string RunConfig::manifest() const {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "manifest" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "version" << YAML::Value << kVersion;
  e << YAML::Key << "command" << YAML::Value << task_name(task.kind);
  e << YAML::EndMap;

  if (system) {
    e << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "sites" << YAML::Value << system->sites;
    e << YAML::Key << "U" << YAML::Value << system->U;
    e << YAML::Key << "J" << YAML::Value << system->J;
    if (!system->onsite.empty()) emit_list(e, "onsite", system->onsite);
    if (system->drive) {
      e << YAML::Key << "drive" << YAML::Value << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "amplitude" << YAML::Value << system->drive->amplitude;
      e << YAML::Key << "omega" << YAML::Value << system->drive->omega;
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  if (state) {
    static const char* kinds[] = {"coherent", "fock", "point"};
    e << YAML::Key << "state" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << kinds[static_cast<int>(state->kind)];
    if (state->kind == StateConfig::Kind::point) {
      emit_list(e, "q", state->q);
      emit_list(e, "p", state->p);
    } else {
      emit_list(e, "occupations", state->occupations);
      if (!state->phases.empty()) emit_list(e, "phases", state->phases);
    }
    e << YAML::EndMap;
  }

  const auto& n = numerics;
  e << YAML::Key << "numerics" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << n.flow.dt;
  e << YAML::Key << "krylov_dim" << YAML::Value << n.propagator.krylov_dim;
  e << YAML::Key << "norm_tol" << YAML::Value << n.propagator.norm_tol;
  e << YAML::Key << "leakage_tol" << YAML::Value << n.propagator.leakage_tol;
  e << YAML::Key << "krylov_tol" << YAML::Value << n.propagator.krylov_tol;
  e << YAML::Key << "samples" << YAML::Value << n.samples;
  e << YAML::Key << "seed" << YAML::Value << n.seed;
  e << YAML::Key << "workers" << YAML::Value << n.workers;
  e << YAML::Key << "weyl_corrected" << YAML::Value << n.flow.weyl_corrected;
  if (n.basis.mode || n.basis.n_max) {
    e << YAML::Key << "basis" << YAML::Value << YAML::BeginMap;
    if (n.basis.mode)
      e << YAML::Key << "mode" << YAML::Value
        << (*n.basis.mode == BasisMode::truncated ? "truncated" : "fixed_number");
    if (n.basis.n_max) e << YAML::Key << "n_max" << YAML::Value << *n.basis.n_max;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  const auto& t = task;
  e << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << task_name(t.kind);
  switch (t.kind) {
    case TaskKind::quantum_otoc:
    case TaskKind::classical_otoc:
      emit_observable(e, "A", t.A);
      emit_observable(e, "B", t.B);
      if (!t.times.values.empty()) {
        emit_list(e, "times", t.times.values);
      } else {
        e << YAML::Key << "times" << YAML::Value << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "start" << YAML::Value << t.times.start.value_or(0.0);
        e << YAML::Key << "stop" << YAML::Value << t.times.stop.value_or(0.0);
        e << YAML::Key << "count" << YAML::Value << t.times.count.value_or(0);
        e << YAML::EndMap;
      }
      break;
    case TaskKind::cinf: {
      emit_observable(e, "A", t.A);
      emit_observable(e, "B", t.B);
      const auto& p = t.profile;
      e << YAML::Key << "profile" << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "n_traj" << YAML::Value << p.n_traj;
      e << YAML::Key << "horizon" << YAML::Value << p.horizon;
      e << YAML::Key << "burn_in" << YAML::Value << p.burn_in;
      e << YAML::Key << "e_bins" << YAML::Value << p.e_bins;
      e << YAML::Key << "n_bins" << YAML::Value << p.n_bins;
      e << YAML::Key << "min_count" << YAML::Value << p.min_count;
      e << YAML::Key << "derivative" << YAML::Value
        << (p.derivative == ProfileDerivative::local_linear ? "local_linear" : "finite_difference");
      e << YAML::Key << "span" << YAML::Value << p.span;
      e << YAML::Key << "cross_fit" << YAML::Value << p.cross_fit;
      e << YAML::Key << "min_fit" << YAML::Value << p.min_fit;
      e << YAML::Key << "fd_stride" << YAML::Value << p.fd_stride;
      e << YAML::Key << "broaden" << YAML::Value << p.broaden;
      e << YAML::Key << "dt" << YAML::Value << p.dt;
      e << YAML::Key << "max_excluded" << YAML::Value << p.max_excluded;
      e << YAML::EndMap;
      break;
    }
    case TaskKind::lyapunov:
      e << YAML::Key << "horizon" << YAML::Value << t.horizon;
      e << YAML::Key << "renorm" << YAML::Value << t.renorm;
      break;
    case TaskKind::poincare:
      e << YAML::Key << "T" << YAML::Value << t.T;
      e << YAML::Key << "direction" << YAML::Value
        << (t.direction == CrossingDirection::decreasing ? "decreasing" : "increasing");
      break;
    case TaskKind::strobo: e << YAML::Key << "periods" << YAML::Value << t.periods; break;
    case TaskKind::families:
      e << YAML::Key << "q0" << YAML::Value << t.q0;
      e << YAML::Key << "q_target" << YAML::Value << t.q_target;
      e << YAML::Key << "t" << YAML::Value << t.t;
      e << YAML::Key << "p_min" << YAML::Value << t.families.p_min;
      e << YAML::Key << "p_max" << YAML::Value << t.families.p_max;
      e << YAML::Key << "steps" << YAML::Value << t.families.steps;
      e << YAML::Key << "root_tol" << YAML::Value << t.families.root_tol;
      break;
    case TaskKind::validate: e << YAML::Key << "quick" << YAML::Value << t.quick; break;
  }
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace bhotoc
