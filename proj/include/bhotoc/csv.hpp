#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bhotoc/series.hpp"

namespace bhotoc {

/// 17 significant digits, "C" formatting.
std::string format_double(double v);

/// Comma-separated file with one header row. Throws std::runtime_error on I/O failure.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

/// otoc.csv: t,C,stderr
void write_otoc_csv(const std::filesystem::path& path, const OTOCSeries& s);

}  // namespace bhotoc
