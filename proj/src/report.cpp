#include "ideajudge/report.hpp"

#include <cstdio>
#include <fstream>

#include "ideajudge/errors.hpp"

namespace ideajudge {

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string out = buf;
  if (out == "-0.000") out = "0.000";
  return out;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw Error("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "--"; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
  };
  return std::visit(Visitor{}, c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(double v) const { return std::stod(format_real(v)); }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(columns[i]);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cell_text(row[i]));
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json Table::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["metadata"] = metadata;
  j["columns"] = columns;
  auto rows_json = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[columns[i]] = cell_json(row[i]);
    rows_json.push_back(std::move(obj));
  }
  j["rows"] = std::move(rows_json);
  return j;
}

void write_table(const Table& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / (table.name + ".csv"), std::ios::binary | std::ios::trunc);
  std::ofstream json(dir / (table.name + ".json"), std::ios::binary | std::ios::trunc);
  if (!csv || !json) throw Error("cannot write report " + table.name + " under " + dir.string());
  csv << table.to_csv();
  json << table.to_json().dump(2) << '\n';
}

}  // namespace ideajudge
