#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ideajudge {

enum class Dimension {
  specificity,
  technical_validity,
  innovativeness,
  competitive_advantage,
  need_validity,
  market_size,
};

inline constexpr std::array<Dimension, 6> kAllDimensions = {
    Dimension::specificity,           Dimension::technical_validity,
    Dimension::innovativeness,        Dimension::competitive_advantage,
    Dimension::need_validity,         Dimension::market_size,
};

std::string_view to_string(Dimension d);
std::optional<Dimension> try_parse_dimension(std::string_view s);
/// Throws ParseError on an unknown name.
Dimension parse_dimension(std::string_view s);

struct RubricLevel {
  int score = 0;
  std::string description;
};

struct DimensionSpec {
  Dimension id = Dimension::specificity;
  int scale_min = 0;
  int scale_max = 0;
  /// Score that must be strictly exceeded before gated dimensions are scored.
  std::optional<int> gate_threshold;
  std::string name;
  std::string description;
  /// Extra framing shown before the levels (competitive advantage only).
  std::string preamble;
  std::vector<RubricLevel> rubric_levels;

  bool in_scale(int score) const { return score >= scale_min && score <= scale_max; }
  /// Scale midpoint rounded down.
  int midpoint() const { return scale_min + (scale_max - scale_min) / 2; }
  std::vector<int> value_domain() const;
  const RubricLevel& level(int score) const;
};

/// Spec for `d` backed by the rubric compiled into the library.
const DimensionSpec& dimension_spec(Dimension d);

/// Dimensions that must pass their gate before `d` may be scored.
std::vector<Dimension> upstream_gates(Dimension d);

/// Parses a rubric document (see data/rubric.json). Every dimension must be
/// present and its levels must cover its scale exactly once.
std::array<DimensionSpec, 6> parse_rubric(std::string_view json_text);
std::array<DimensionSpec, 6> load_rubric(const std::filesystem::path& path);

}  // namespace ideajudge
