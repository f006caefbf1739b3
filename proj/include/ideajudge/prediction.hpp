#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ideajudge/conditioning.hpp"
#include "ideajudge/errors.hpp"

namespace ideajudge {

inline constexpr int kDefaultConfidenceThreshold = 80;

enum class PredictionErrorKind {
  no_json,
  missing_key,
  wrong_type,
  out_of_scale,
  non_integral,
  bad_confidence,
};

std::string_view to_string(PredictionErrorKind k);

class PredictionFormatError : public Error {
 public:
  PredictionFormatError(PredictionErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  PredictionErrorKind kind() const noexcept { return kind_; }

 private:
  PredictionErrorKind kind_;
};

struct ParsedPrediction {
  int score = 0;
  std::string reason;
  int confidence = 0;
};

/// Extracts the first JSON object in `raw` that carries score, reason and
/// confidence, then validates it against the dimension's scale.
ParsedPrediction parse_prediction(std::string_view raw, Dimension dimension);

struct JudgePrediction {
  std::string evaluator_id;
  std::string idea_id;
  Dimension dimension = Dimension::specificity;
  Domain domain = Domain::nlp;
  Condition condition = Condition::zero_shot;
  std::size_t shots = 0;
  std::uint64_t seed = 0;
  int score = 0;
  std::string reason;
  int confidence = 0;
  std::string backend_id;
  bool discarded = false;

  std::string target_key() const;
  bool operator==(const JudgePrediction&) const = default;
};

struct FilterResult {
  std::vector<JudgePrediction> kept;
  std::vector<JudgePrediction> discarded;
  /// Empty for empty input.
  std::optional<double> discard_rate;
};

/// Splits on confidence < threshold and marks the discarded side.
FilterResult confidence_filter(std::vector<JudgePrediction> preds,
                               int threshold = kDefaultConfidenceThreshold);

/// Discard rate per (dimension, domain) slice.
std::map<std::pair<Dimension, Domain>, std::optional<double>> discard_rates(
    std::span<const JudgePrediction> preds, int threshold = kDefaultConfidenceThreshold);

/// Most frequent score. Tied modes resolve to their median, taking the lower
/// of the two middle values on an even count. Empty input yields nullopt.
std::optional<int> majority_vote(std::span<const int> scores);

}  // namespace ideajudge
