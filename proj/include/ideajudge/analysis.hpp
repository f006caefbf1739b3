#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ideajudge/agreement.hpp"
#include "ideajudge/backend.hpp"
#include "ideajudge/embedding.hpp"
#include "ideajudge/report.hpp"
#include "ideajudge/runner.hpp"

namespace ideajudge {

inline const std::vector<std::size_t> kDefaultShots = {1, 3, 5, 7, 9};

/// Everything a study needs. JSON keys match the CLI flag names with
/// underscores, so a config file and a command line are interchangeable.
struct StudyConfig {
  std::filesystem::path corpus_dir;
  std::vector<Dimension> dimensions{kAllDimensions.begin(), kAllDimensions.end()};
  std::vector<Domain> domains{kAllDomains.begin(), kAllDomains.end()};
  std::vector<Condition> conditions{kAllConditions.begin(), kAllConditions.end()};
  std::vector<std::size_t> shots = kDefaultShots;
  std::vector<std::uint64_t> seeds = kDefaultSeeds;
  BackendConfig backend;
  int confidence_threshold = kDefaultConfidenceThreshold;
  RenderConfig render;
  std::filesystem::path out_dir = "out";
  /// Run artifact directory; <out_dir>/runs when empty.
  std::filesystem::path runs_dir;
  DistanceMetric metric = DistanceMetric::ordinal;
  EmbeddingConfig embedding;
  std::size_t workers = 1;
  /// Shot count used by coarse and reasoning reports; largest available if unset.
  std::optional<std::size_t> report_shots;
  std::size_t min_overlap = kDefaultMinOverlap;
  MedianRule median_rule = MedianRule::strict;

  std::filesystem::path resolved_runs_dir() const;

  /// Throws ConfigError.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  /// Unknown keys are rejected. Missing keys keep their defaults.
  static StudyConfig from_json(const nlohmann::json& j);
  static StudyConfig from_file(const std::filesystem::path& path);

  /// One spec per (dimension, domain, condition, shots); zero-shot runs once
  /// with zero shots. Domains without ideas in `corpus` are left out.
  std::vector<RunSpec> run_specs(const Corpus& corpus) const;
};

// ---------------------------------------------------------------------------
// Expert disagreement

struct DisagreementCell {
  Dimension dimension = Dimension::specificity;
  Domain domain = Domain::nlp;
  std::optional<double> alpha;
  std::string alpha_status;  // ok | undefined | insufficient
  std::size_t n_units = 0;
  std::size_t n_evaluators = 0;
  std::optional<double> coarse_jaccard;
  std::size_t qualifying_pairs = 0;
};

std::vector<DisagreementCell> disagreement_cells(const Corpus& corpus,
                                                 DistanceMetric metric = DistanceMetric::ordinal,
                                                 std::size_t min_overlap = kDefaultMinOverlap,
                                                 MedianRule rule = MedianRule::strict);

/// Wide layout: one row per dimension, fine alpha then coarse Jaccard per domain.
Table disagreement_report(const Corpus& corpus, DistanceMetric metric = DistanceMetric::ordinal,
                          std::size_t min_overlap = kDefaultMinOverlap,
                          MedianRule rule = MedianRule::strict);
Table disagreement_detail(std::span<const DisagreementCell> cells);

Table coverage_table(const Corpus& corpus);
Table evaluator_means_table(const Corpus& corpus);
Table violations_table(std::span<const Violation> violations);

// ---------------------------------------------------------------------------
// Judge alignment

struct AlignmentPoint {
  Dimension dimension = Dimension::specificity;
  Domain domain = Domain::nlp;
  Condition condition = Condition::zero_shot;
  std::size_t shots = 0;

  /// Mean over evaluators of the expert-vs-judge alpha on that evaluator's targets.
  std::optional<double> alpha_per_evaluator;
  std::size_t n_evaluators = 0;
  std::size_t n_evaluators_defined = 0;
  /// Expert column pooled over all evaluators vs. the judge, one unit per target.
  std::optional<double> alpha_pooled;
  std::size_t n_pooled_units = 0;

  std::size_t n_targets = 0;
  std::size_t n_scored = 0;
  std::size_t n_skipped = 0;
  std::size_t n_no_surviving = 0;
  std::size_t n_failures = 0;

  bool empty() const { return n_scored == 0; }
  /// Per-evaluator mean for personalized runs, pooled otherwise.
  std::optional<double> primary_alpha() const;
  std::string_view primary_variant() const;
};

/// Alpha between `finals` (keyed by target key) and the experts' own scores.
AlignmentPoint alignment_from_scores(const Corpus& corpus, std::span<const TargetInstance> targets,
                                     const std::map<std::string, int>& finals,
                                     DistanceMetric metric = DistanceMetric::ordinal);

AlignmentPoint alignment_point(const Corpus& corpus, const RunArtifact& artifact,
                               DistanceMetric metric = DistanceMetric::ordinal);

/// Feeds every expert's own scores back in as the judge; alpha is 1 wherever defined.
AlignmentPoint expert_self_check(const Corpus& corpus, Dimension dimension, Domain domain,
                                 DistanceMetric metric = DistanceMetric::ordinal);

/// Sorted by (dimension, domain, condition, shots).
std::vector<AlignmentPoint> alignment_points(const Corpus& corpus,
                                             std::span<const RunArtifact> artifacts,
                                             DistanceMetric metric = DistanceMetric::ordinal);

Table alignment_table(std::span<const AlignmentPoint> points);
/// Per dimension: rows (domain, shots), one primary-alpha column per condition.
/// Zero-shot is repeated on every shot row as a baseline.
std::vector<Table> alignment_curves(std::span<const AlignmentPoint> points);

std::vector<RunArtifact> run_study(const Corpus& corpus, const StudyConfig& config,
                                   JudgeBackend& backend);

/// Loads the corpus, builds the backend and runs every spec in memory.
std::vector<AlignmentPoint> alignment_study(const StudyConfig& config);

Table discard_rate_table(std::span<const RunArtifact> artifacts);

// ---------------------------------------------------------------------------
// Coarse judge metrics

struct CoarseRow {
  Dimension dimension = Dimension::specificity;
  Condition condition = Condition::zero_shot;
  std::size_t shots = 0;
  std::size_t n_evaluators = 0;
  std::optional<double> jaccard;
  std::size_t n_jaccard = 0;
  std::optional<double> top_half;
  std::size_t n_top_half = 0;
};

/// Picks, per (dimension, condition), the artifacts at `shots` (zero-shot
/// always uses 0; unset means the largest shot count present). Throws Error
/// when artifacts are missing.
std::vector<const RunArtifact*> select_artifacts(std::span<const RunArtifact> artifacts,
                                                 Dimension dimension, Condition condition,
                                                 std::optional<std::size_t> shots);

/// Per evaluator: above-median sets and top-half overlap of the judge's final
/// scores against the expert's, over items both scored; averaged over evaluators.
std::vector<CoarseRow> coarse_judge_report(const Corpus& corpus,
                                           std::span<const RunArtifact> artifacts,
                                           std::optional<std::size_t> shots = std::nullopt,
                                           MedianRule rule = MedianRule::strict);

Table coarse_table(std::span<const CoarseRow> rows);

// ---------------------------------------------------------------------------
// Reasoning similarity

struct ReasoningPoint {
  std::string evaluator_a;
  std::string evaluator_b;
  std::size_t shared_instances = 0;
  double alpha = 0.0;
  double cosine = 0.0;
};

struct ReasoningResult {
  Condition condition = Condition::zero_shot;
  std::size_t shots = 0;
  std::vector<ReasoningPoint> points;
  std::optional<double> pearson;
  std::string error;  // set when no correlation could be computed
};

inline constexpr std::size_t kMinSharedInstances = 2;

/// Evaluator pairs with overlapping annotated instances. Per dimension: the
/// pair's expert alpha on the shared instances, and the cosine between each
/// evaluator's mean judge-reason embedding over those instances. A point is
/// (mean alpha, mean cosine) over dimensions where alpha is defined. All
/// artifacts must share one condition and shot count. Throws
/// InsufficientDataError under two qualifying pairs.
ReasoningResult reasoning_similarity_study(const Corpus& corpus,
                                           std::span<const RunArtifact* const> artifacts,
                                           EmbeddingBackend& embedding,
                                           DistanceMetric metric = DistanceMetric::ordinal,
                                           std::size_t min_shared = kMinSharedInstances);

/// One result per condition present; failures land in ReasoningResult::error.
std::vector<ReasoningResult> reasoning_by_condition(const Corpus& corpus,
                                                    std::span<const RunArtifact> artifacts,
                                                    EmbeddingBackend& embedding,
                                                    std::optional<std::size_t> shots,
                                                    DistanceMetric metric = DistanceMetric::ordinal);

Table reasoning_points_table(std::span<const ReasoningResult> results);
Table reasoning_summary_table(std::span<const ReasoningResult> results,
                              const EmbeddingBackend& embedding);

}  // namespace ideajudge
