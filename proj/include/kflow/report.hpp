#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kflow {

const char* version_string() noexcept;

/// Shortest decimal that reads back as the same double; "inf", "-inf", "nan".
std::string fmt(double v);

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  /// "# key = value" lines, written before the column header.
  void preamble(const std::vector<std::pair<std::string, std::string>>& items);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace kflow
