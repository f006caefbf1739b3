#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ideajudge/backend.hpp"
#include "ideajudge/conditioning.hpp"
#include "ideajudge/prediction.hpp"
#include "ideajudge/prompt.hpp"

namespace ideajudge {

inline const std::vector<std::uint64_t> kDefaultSeeds = {0, 1, 2};

/// One (dimension, domain, condition, shots) judge run.
struct RunSpec {
  Dimension dimension = Dimension::specificity;
  Domain domain = Domain::nlp;
  Condition condition = Condition::zero_shot;
  std::size_t shots = 0;
  std::vector<std::uint64_t> seeds = kDefaultSeeds;
  int confidence_threshold = kDefaultConfidenceThreshold;
  RenderConfig render;
  BackendConfig backend;  // recorded in the artifact header
  std::size_t workers = 1;

  nlohmann::ordered_json to_json() const;
  static RunSpec from_json(const nlohmann::json& j);
};

enum class OutcomeStatus { scored, skipped, no_surviving_prediction };

std::string_view to_string(OutcomeStatus s);

struct TargetOutcome {
  TargetInstance target;
  OutcomeStatus status = OutcomeStatus::skipped;
  std::optional<int> final_score;
  std::string detail;

  bool operator==(const TargetOutcome&) const = default;
};

/// A backend call or parse that produced no prediction.
struct CallFailure {
  std::string target_key;
  std::uint64_t seed = 0;
  std::string error;  // transport | timeout | replay_miss | backend | <parse error kind>
  std::string message;

  bool operator==(const CallFailure&) const = default;
};

struct RunArtifact {
  RunSpec spec;
  /// Target order, then seed order; discarded predictions included.
  std::vector<JudgePrediction> predictions;
  /// One per target, in enumerate_targets order.
  std::vector<TargetOutcome> outcomes;
  std::vector<CallFailure> failures;
  std::size_t backend_calls = 0;

  /// Final voted score per target key.
  std::map<std::string, int> final_scores() const;
  std::size_t count(OutcomeStatus status) const;
  std::optional<double> discard_rate() const;
};

/// Enumerates targets, then per target and seed: conditions, renders,
/// invokes, parses, filters and votes. Per-target failures are recorded and
/// skipped; only configuration errors abort.
RunArtifact run_condition(const Corpus& corpus, const RunSpec& spec, JudgeBackend& backend);

/// Header line with the full configuration, then prediction, failure and
/// outcome lines, all line-delimited JSON.
std::string serialize_run_artifact(const RunArtifact& artifact);
RunArtifact parse_run_artifact(std::string_view text);
void write_run_artifact(const RunArtifact& artifact, const std::filesystem::path& path);
RunArtifact read_run_artifact(const std::filesystem::path& path);

/// "<dimension>__<domain>__<condition>__<shots>shot.jsonl"
std::string artifact_filename(const RunSpec& spec);

}  // namespace ideajudge
