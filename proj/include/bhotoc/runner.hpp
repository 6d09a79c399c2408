#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "bhotoc/config.hpp"

namespace bhotoc {

struct RunReport {
  std::vector<std::filesystem::path> files;
  /// False only for a validate run with failing checks.
  bool passed = true;
};

/// Validates the config, runs its task and writes the data files plus
/// manifest.yaml into out_dir (created if missing). One-line results go to log.
RunReport run_task(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace bhotoc
