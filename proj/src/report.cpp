#include "kflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

#ifndef KFLOW_VERSION
#define KFLOW_VERSION "0.0.0"
#endif

namespace kflow {

const char* version_string() noexcept { return "kflow " KFLOW_VERSION; }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {  // shortest form that reads back exactly
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::preamble(const std::vector<std::pair<std::string, std::string>>& items) {
  for (const auto& [k, v] : items) out_ << "# " << k << " = " << v << "\r\n";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
}

}  // namespace kflow
