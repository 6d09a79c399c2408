#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bhotoc/config.hpp"
#include "bhotoc/csv.hpp"
#include "bhotoc/error.hpp"
#include "bhotoc/runner.hpp"

using namespace bhotoc;
namespace fs = std::filesystem;

namespace {

const char* kDimerOtoc = R"(
system: {sites: 2, U: 3.0, J: 1.0, drive: {amplitude: 20.0, omega: 10.0}}
state: {kind: coherent, occupations: [16, 14], phases: [0, 0]}
numerics: {dt: 0.002, samples: 200, seed: 7, workers: 1}
task:
  kind: classical-otoc
  A: {kind: p_squared, site: 1}
  B: {kind: p, site: 2}
  times: {start: 0, stop: 0.5, count: 6}
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bhotoc_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("config: parse a classical otoc run") {
  const auto c = RunConfig::parse(kDimerOtoc);
  REQUIRE(c.system.has_value());
  CHECK(c.system->sites == 2);
  CHECK(c.system->drive->omega == 10.0);
  CHECK(c.task.kind == TaskKind::classical_otoc);
  CHECK(c.task.A.kind == ObservableKind::p_squared);
  CHECK(c.task.A.site == 0);  // 1-based in the file
  CHECK(c.task.B.site == 1);
  CHECK(c.numerics.flow.dt == 0.002);
  CHECK(c.numerics.propagator.dt == 0.002);
  CHECK(c.numerics.seed == 7);
  CHECK(c.task.times.resolve().size() == 6);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config: unknown keys are rejected") {
  CHECK_THROWS_AS(RunConfig::parse("sytem: {sites: 2}\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("system: {sites: 2, UU: 1}\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("system: {sites: 2, drive: {amplitude: 1, frequency: 2}}\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("numerics: {sample: 10}\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("task: {kind: lyapunov, periods: 3}\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("task: {kind: cinf, profile: {ntraj: 3}}\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("task: {kind: teleport}\n"), ConfigError);
  try {
    RunConfig::parse("system: {sites: 2, UU: 1}\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("system.UU") != std::string::npos);
  }
}

TEST_CASE("config: task requirements are checked before any compute") {
  auto c = RunConfig::parse(kDimerOtoc);
  c.task.kind = TaskKind::quantum_otoc;
  CHECK_THROWS_AS(c.validate(), ConfigError);  // quadratures without n_max
  c.numerics.basis.n_max = 40;
  CHECK_NOTHROW(c.validate());
  c.numerics.basis.mode = BasisMode::fixed_number;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  auto d = RunConfig::parse(kDimerOtoc);
  d.task.B.site = 5;
  CHECK_THROWS_AS(d.validate(), ConfigError);

  auto e = RunConfig::parse(kDimerOtoc);
  e.task.kind = TaskKind::poincare;
  CHECK_THROWS_AS(e.validate(), ConfigError);

  CHECK_THROWS_AS(RunConfig::parse("task: {kind: lyapunov}\n").validate(), ConfigError);
}

TEST_CASE("config: manifest round trip") {
  const auto c = RunConfig::parse(kDimerOtoc);
  const std::string m = c.manifest();
  CHECK(m.find("version") != std::string::npos);
  CHECK(m.find(kVersion) != std::string::npos);
  const auto again = RunConfig::parse(m);
  CHECK(again.manifest() == m);
}

TEST_CASE("config: task names") {
  for (auto k : {TaskKind::quantum_otoc, TaskKind::classical_otoc, TaskKind::cinf, TaskKind::lyapunov,
                 TaskKind::poincare, TaskKind::strobo, TaskKind::families, TaskKind::validate})
    CHECK(parse_task(task_name(k)) == k);
  CHECK(task_name(TaskKind::quantum_otoc) == "quantum-otoc");
}

TEST_CASE("csv formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  const fs::path d = scratch("csv");
  fs::create_directories(d);
  CsvWriter w(d / "a.csv", {"x", "y"});
  w.row({1.0, 0.5});
  CHECK_THROWS(w.row({1.0}));
  w.close();
  CHECK(slurp(d / "a.csv") == "x,y\n1,0.5\n");
}

TEST_CASE("runner: classical otoc output and worker determinism") {
  auto c = RunConfig::parse(kDimerOtoc);
  const fs::path a = scratch("w1"), b = scratch("w8");
  std::ostringstream log;
  run_task(c, a, log);
  c.numerics.workers = 8;
  run_task(c, b, log);
  const std::string csv = slurp(a / "otoc.csv");
  CHECK(csv.rfind("t,C,stderr\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(csv == slurp(b / "otoc.csv"));
  CHECK(fs::exists(a / "manifest.yaml"));
}

TEST_CASE("runner: rerunning from the manifest reproduces the outputs") {
  const auto c = RunConfig::parse(kDimerOtoc);
  const fs::path a = scratch("m1"), b = scratch("m2");
  std::ostringstream log;
  run_task(c, a, log);
  run_task(RunConfig::load(a / "manifest.yaml"), b, log);
  CHECK(slurp(a / "otoc.csv") == slurp(b / "otoc.csv"));
  CHECK(slurp(a / "manifest.yaml") == slurp(b / "manifest.yaml"));
}

TEST_CASE("runner: families prints the family count") {
  const auto c = RunConfig::parse("task: {kind: families, q0: 0, q_target: 0, t: 0.03}\n");
  std::ostringstream log;
  const auto r = run_task(c, scratch("fam"), log);
  CHECK(log.str().find("families=1") != std::string::npos);
  CHECK(r.passed);
  CHECK(slurp(r.files.front()).rfind("p0,q_t\n", 0) == 0);
}

TEST_CASE("shipped example configs parse") {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(BHOTOC_CONFIG_DIR)) {
    if (e.path().extension() != ".yaml") continue;
    INFO(e.path().string());
    CHECK_NOTHROW(RunConfig::load(e.path()));
    ++n;
  }
  CHECK(n >= 10);
}
