#include "ideajudge/dimension.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ideajudge/errors.hpp"
#include "ideajudge/rubric_data.hpp"

namespace ideajudge {

namespace {

struct ScaleInfo {
  Dimension id;
  std::string_view name;
  int scale_min;
  int scale_max;
  std::optional<int> gate;
};

constexpr std::array<ScaleInfo, 6> kScales = {{
    {Dimension::specificity, "specificity", 1, 4, 2},
    {Dimension::technical_validity, "technical_validity", 1, 4, 1},
    {Dimension::innovativeness, "innovativeness", 1, 5, std::nullopt},
    {Dimension::competitive_advantage, "competitive_advantage", 1, 4, std::nullopt},
    {Dimension::need_validity, "need_validity", 0, 3, std::nullopt},
    {Dimension::market_size, "market_size", 0, 3, std::nullopt},
}};

const ScaleInfo& scale_info(Dimension d) { return kScales[static_cast<std::size_t>(d)]; }

}  // namespace

std::string_view to_string(Dimension d) { return scale_info(d).name; }

std::optional<Dimension> try_parse_dimension(std::string_view s) {
  for (const auto& info : kScales) {
    if (info.name == s) return info.id;
  }
  return std::nullopt;
}

Dimension parse_dimension(std::string_view s) {
  if (auto d = try_parse_dimension(s)) return *d;
  throw ParseError("unknown dimension '" + std::string(s) + "'");
}

std::vector<int> DimensionSpec::value_domain() const {
  std::vector<int> out;
  for (int v = scale_min; v <= scale_max; ++v) out.push_back(v);
  return out;
}

const RubricLevel& DimensionSpec::level(int score) const {
  for (const auto& lvl : rubric_levels) {
    if (lvl.score == score) return lvl;
  }
  throw RangeError("score " + std::to_string(score) + " is outside the " +
                   std::string(to_string(id)) + " scale");
}

std::vector<Dimension> upstream_gates(Dimension d) {
  switch (d) {
    case Dimension::specificity:
      return {};
    case Dimension::technical_validity:
    case Dimension::need_validity:
    case Dimension::market_size:
      return {Dimension::specificity};
    case Dimension::innovativeness:
    case Dimension::competitive_advantage:
      return {Dimension::specificity, Dimension::technical_validity};
  }
  return {};
}

std::array<DimensionSpec, 6> parse_rubric(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("rubric: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("rubric: top level must be an object");

  std::array<DimensionSpec, 6> specs;
  for (const auto& info : kScales) {
    auto it = doc.find(std::string(info.name));
    if (it == doc.end()) throw ParseError("rubric: missing dimension " + std::string(info.name));
    const auto& entry = *it;
    DimensionSpec spec;
    spec.id = info.id;
    spec.scale_min = info.scale_min;
    spec.scale_max = info.scale_max;
    spec.gate_threshold = info.gate;
    spec.name = entry.value("name", std::string(info.name));
    spec.description = entry.value("description", std::string());
    spec.preamble = entry.value("preamble", std::string());

    const auto& levels = entry.at("levels");
    if (levels.size() != static_cast<std::size_t>(info.scale_max - info.scale_min + 1)) {
      throw ParseError("rubric: " + std::string(info.name) +
                       " levels do not match its scale");
    }
    for (int score = info.scale_min; score <= info.scale_max; ++score) {
      auto lvl = levels.find(std::to_string(score));
      if (lvl == levels.end() || !lvl->is_string()) {
        throw ParseError("rubric: " + std::string(info.name) + " has no level " +
                         std::to_string(score));
      }
      spec.rubric_levels.push_back({score, lvl->get<std::string>()});
    }
    specs[static_cast<std::size_t>(info.id)] = std::move(spec);
  }
  return specs;
}

std::array<DimensionSpec, 6> load_rubric(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open rubric file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_rubric(buf.str());
}

const DimensionSpec& dimension_spec(Dimension d) {
  static const std::array<DimensionSpec, 6> specs = parse_rubric(detail::kRubricJson);
  return specs[static_cast<std::size_t>(d)];
}

}  // namespace ideajudge
