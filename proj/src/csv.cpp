#include "bhotoc/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace bhotoc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::logic_error("csv row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("failed writing " + path_.string());
}

void write_otoc_csv(const std::filesystem::path& path, const OTOCSeries& s) {
  CsvWriter w(path, {"t", "C", "stderr"});
  for (std::size_t i = 0; i < s.size(); ++i) w.row({s.times[i], s.values[i], s.stderr_[i]});
  w.close();
}

}  // namespace bhotoc
