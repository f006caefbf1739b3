#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <optional>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ideajudge {

/// Empty cell (monostate) renders as "--" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

/// A flat report. CSV and JSON renderings carry identical values: reals are
/// rounded to three decimals before either is produced.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  void add_row(std::vector<Cell> row);
  std::string to_csv() const;
  /// {"name", "metadata", "columns", "rows": [{column: value}, ...]}
  nlohmann::ordered_json to_json() const;
};

std::string format_real(double value);

template <typename T>
Cell optional_cell(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<double>(*v);
  } else {
    return static_cast<std::int64_t>(*v);
  }
}

/// Writes <dir>/<name>.csv and <dir>/<name>.json.
void write_table(const Table& table, const std::filesystem::path& dir);

}  // namespace ideajudge
