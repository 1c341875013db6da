#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace spectrade {

// 12 significant digits, '.' decimal separator, "inf"/"-inf" for infinities,
// empty for NaN. Independent of the global locale.
std::string format_number(double value);
std::string format_number(const std::optional<double>& value);

// RFC-4180 quoting: fields containing ',', '"', CR or LF are quoted with
// embedded quotes doubled.
std::string csv_escape(std::string_view field);

// Writes rows terminated by a bare LF.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace spectrade
