#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace critbranch {

/// 12 significant digits ("%.12g"); non-finite values render as inf, -inf, nan.
std::string format_number(double x);
std::string format_number(std::int64_t x);

/// Rounded to 12 significant digits; null when not finite.
nlohmann::json json_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes text to `path`, or to stdout when path is empty or "-".
void write_output(const std::string& path, std::string_view text);

}  // namespace critbranch
