#include "ideajudge/prediction.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace ideajudge {

std::string_view to_string(PredictionErrorKind k) {
  switch (k) {
    case PredictionErrorKind::no_json:
      return "no_json";
    case PredictionErrorKind::missing_key:
      return "missing_key";
    case PredictionErrorKind::wrong_type:
      return "wrong_type";
    case PredictionErrorKind::out_of_scale:
      return "out_of_scale";
    case PredictionErrorKind::non_integral:
      return "non_integral";
    case PredictionErrorKind::bad_confidence:
      return "bad_confidence";
  }
  return "?";
}

namespace {

// Index one past the '}' matching the '{' at `open`, or npos.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

int integral_value(const nlohmann::json& v, const char* key) {
  if (!v.is_number()) {
    throw PredictionFormatError(PredictionErrorKind::wrong_type,
                                std::string("\"") + key + "\" is not a number");
  }
  if (v.is_number_integer()) {
    auto wide = v.get<long long>();
    if (wide < -1000000 || wide > 1000000) {
      throw PredictionFormatError(PredictionErrorKind::out_of_scale,
                                  std::string("\"") + key + "\" is out of range");
    }
    return static_cast<int>(wide);
  }
  double d = v.get<double>();
  if (!std::isfinite(d) || std::floor(d) != d) {
    throw PredictionFormatError(PredictionErrorKind::non_integral,
                                std::string("\"") + key + "\" = " + v.dump() +
                                    " is not an integer");
  }
  if (std::fabs(d) > 1e6) {
    throw PredictionFormatError(PredictionErrorKind::out_of_scale,
                                std::string("\"") + key + "\" is out of range");
  }
  return static_cast<int>(d);
}

}  // namespace

ParsedPrediction parse_prediction(std::string_view raw, Dimension dimension) {
  std::optional<nlohmann::json> found;
  bool saw_object = false;
  std::string missing;
  for (std::size_t open = raw.find('{'); open != std::string_view::npos && !found;
       open = raw.find('{', open + 1)) {
    std::size_t end = match_object(raw, open);
    if (end == std::string_view::npos) continue;
    auto obj = nlohmann::json::parse(raw.substr(open, end - open), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) continue;
    saw_object = true;
    for (const char* key : {"score", "reason", "confidence"}) {
      if (!obj.contains(key)) {
        missing = key;
        break;
      }
      missing.clear();
    }
    if (missing.empty()) found = std::move(obj);
  }
  if (!found) {
    if (saw_object) {
      throw PredictionFormatError(PredictionErrorKind::missing_key,
                                  "JSON output lacks key \"" + missing + "\"");
    }
    throw PredictionFormatError(PredictionErrorKind::no_json, "no JSON object in output");
  }

  const auto& obj = *found;
  ParsedPrediction out;
  out.score = integral_value(obj.at("score"), "score");
  const auto& spec = dimension_spec(dimension);
  if (!spec.in_scale(out.score)) {
    throw PredictionFormatError(PredictionErrorKind::out_of_scale,
                                "score " + std::to_string(out.score) + " is outside the " +
                                    std::string(to_string(dimension)) + " scale [" +
                                    std::to_string(spec.scale_min) + ", " +
                                    std::to_string(spec.scale_max) + "]");
  }
  const auto& reason = obj.at("reason");
  if (!reason.is_string()) {
    throw PredictionFormatError(PredictionErrorKind::wrong_type, "\"reason\" is not a string");
  }
  out.reason = reason.get<std::string>();
  try {
    out.confidence = integral_value(obj.at("confidence"), "confidence");
  } catch (const PredictionFormatError& e) {
    if (e.kind() == PredictionErrorKind::wrong_type) throw;
    throw PredictionFormatError(PredictionErrorKind::bad_confidence, e.what());
  }
  if (out.confidence < 0 || out.confidence > 100) {
    throw PredictionFormatError(PredictionErrorKind::bad_confidence,
                                "confidence " + std::to_string(out.confidence) +
                                    " is outside [0, 100]");
  }
  return out;
}

std::string JudgePrediction::target_key() const {
  return evaluator_id + "|" + idea_id + "|" + std::string(to_string(dimension));
}

FilterResult confidence_filter(std::vector<JudgePrediction> preds, int threshold) {
  FilterResult out;
  const std::size_t total = preds.size();
  for (auto& p : preds) {
    p.discarded = p.confidence < threshold;
    (p.discarded ? out.discarded : out.kept).push_back(std::move(p));
  }
  if (total > 0) {
    out.discard_rate = static_cast<double>(out.discarded.size()) / static_cast<double>(total);
  }
  return out;
}

std::map<std::pair<Dimension, Domain>, std::optional<double>> discard_rates(
    std::span<const JudgePrediction> preds, int threshold) {
  std::map<std::pair<Dimension, Domain>, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& p : preds) {
    auto& [dropped, total] = counts[{p.dimension, p.domain}];
    dropped += p.confidence < threshold;
    ++total;
  }
  std::map<std::pair<Dimension, Domain>, std::optional<double>> out;
  for (const auto& [slice, c] : counts) {
    out[slice] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

std::optional<int> majority_vote(std::span<const int> scores) {
  if (scores.empty()) return std::nullopt;
  std::map<int, std::size_t> freq;
  for (int s : scores) ++freq[s];
  std::size_t best = 0;
  for (const auto& [s, f] : freq) best = std::max(best, f);
  std::vector<int> modes;  // ascending, since the map is ordered
  for (const auto& [s, f] : freq) {
    if (f == best) modes.push_back(s);
  }
  return modes[(modes.size() - 1) / 2];
}

}  // namespace ideajudge
