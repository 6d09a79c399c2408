#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bhotoc {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured defect
  double threshold = 0.0;  // pass if value < threshold
  std::string detail;
};

/// The property suite behind the `validate` subcommand: symplecticity,
/// conservation laws, norm drift, finite-difference and dense-algebra oracles,
/// sampler moments, Moyal oracle and worker-count determinism. `quick`
/// shortens horizons for smoke testing.
std::vector<CheckResult> run_validation(bool quick, std::size_t workers);

/// "PASS name value < threshold (detail)"
std::string format_check(const CheckResult& r);

}  // namespace bhotoc
