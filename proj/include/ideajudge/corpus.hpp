#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ideajudge/dimension.hpp"

namespace ideajudge {

enum class Domain { nlp, cs, matchem };
enum class Background { technical, business };

inline constexpr std::array<Domain, 3> kAllDomains = {Domain::nlp, Domain::cs,
                                                      Domain::matchem};

std::string_view to_string(Domain d);
std::string_view to_string(Background b);
std::optional<Domain> try_parse_domain(std::string_view s);
Domain parse_domain(std::string_view s);
Background parse_background(std::string_view s);

struct Patent {
  std::string patent_id;
  Domain domain = Domain::nlp;
  std::string title;
  std::string abstract;
  std::vector<std::string> claims;
  std::string description;
};

struct Idea {
  std::string idea_id;
  std::string patent_id;
  std::string system_id;
  std::string title;
  std::string description;
  std::string implementation;
  std::string differentiation;
};

struct Evaluator {
  std::string evaluator_id;
  Domain domain = Domain::nlp;
  Background background = Background::technical;
};

struct ScoreKey {
  std::string evaluator_id;
  std::string idea_id;
  Dimension dimension = Dimension::specificity;

  auto operator<=>(const ScoreKey&) const = default;
  bool operator==(const ScoreKey&) const = default;
};

struct ScoreRecord {
  std::string evaluator_id;
  std::string idea_id;
  Dimension dimension = Dimension::specificity;
  int score = 0;
  std::optional<std::string> reason;

  ScoreKey key() const { return {evaluator_id, idea_id, dimension}; }
  bool operator==(const ScoreRecord&) const = default;
};

/// Immutable, fully indexed collection of patents, ideas, evaluators and
/// scores. Construct through Corpus::build or load_corpus; every foreign key
/// resolves and every score lies on its dimension's scale.
class Corpus {
 public:
  Corpus() = default;

  /// Throws DuplicateKeyError, ForeignKeyError, RangeError.
  static Corpus build(std::vector<Patent> patents, std::vector<Idea> ideas,
                      std::vector<Evaluator> evaluators, std::vector<ScoreRecord> scores);

  // Each collection is sorted by its key.
  const std::vector<Patent>& patents() const { return patents_; }
  const std::vector<Idea>& ideas() const { return ideas_; }
  const std::vector<Evaluator>& evaluators() const { return evaluators_; }
  const std::vector<ScoreRecord>& scores() const { return scores_; }

  const Patent* find_patent(std::string_view id) const;
  const Idea* find_idea(std::string_view id) const;
  const Evaluator* find_evaluator(std::string_view id) const;
  /// Throws std::out_of_range for unknown ids.
  const Patent& patent(std::string_view id) const;
  const Idea& idea(std::string_view id) const;
  const Evaluator& evaluator(std::string_view id) const;

  /// Domain of the patent that grounds the idea.
  Domain idea_domain(std::string_view idea_id) const;
  const Patent& patent_of(std::string_view idea_id) const;

  std::optional<int> score(std::string_view evaluator_id, std::string_view idea_id,
                           Dimension dim) const;
  /// Indices into scores(), in key order.
  const std::vector<std::size_t>& scores_by_evaluator(std::string_view evaluator_id,
                                                      Dimension dim) const;
  const std::vector<std::size_t>& scores_by_idea(std::string_view idea_id,
                                                 Dimension dim) const;
  const std::vector<std::size_t>& ideas_by_patent(std::string_view patent_id) const;

  bool operator==(const Corpus& other) const;

 private:
  using Slice = std::pair<std::string, Dimension>;

  std::vector<Patent> patents_;
  std::vector<Idea> ideas_;
  std::vector<Evaluator> evaluators_;
  std::vector<ScoreRecord> scores_;

  std::map<std::string, std::size_t, std::less<>> patent_index_;
  std::map<std::string, std::size_t, std::less<>> idea_index_;
  std::map<std::string, std::size_t, std::less<>> evaluator_index_;
  std::map<ScoreKey, std::size_t> score_index_;
  std::map<Slice, std::vector<std::size_t>> by_evaluator_dim_;
  std::map<Slice, std::vector<std::size_t>> by_idea_dim_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_patent_;
};

struct CorpusPaths {
  std::filesystem::path patents;
  std::filesystem::path ideas;
  std::filesystem::path evaluators;
  std::filesystem::path scores;

  /// patents.jsonl, ideas.jsonl, evaluators.jsonl, scores.jsonl under `dir`.
  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

/// Loads the four line-delimited JSON files. Errors carry the file name and
/// 1-based line number of the offending record.
Corpus load_corpus(const CorpusPaths& paths);
void save_corpus(const Corpus& corpus, const CorpusPaths& paths);

// A downstream score present on an (evaluator, idea) pair although one of its
// upstream gates failed or was never scored.
struct Violation {
  std::string evaluator_id;
  std::string idea_id;
  std::vector<Dimension> failed_gates;
  std::vector<Dimension> offending;

  std::string describe() const;
  bool operator==(const Violation&) const = default;
};

/// Empty result means the corpus follows the staged screening protocol.
std::vector<Violation> validate_screening(const Corpus& corpus);

struct DomainMismatch {
  std::string evaluator_id;
  std::string idea_id;
  Domain evaluator_domain;
  Domain idea_domain;
};

/// Evaluators scoring ideas outside their own domain; reported as warnings.
std::vector<DomainMismatch> domain_mismatches(const Corpus& corpus);

std::map<std::string, double> evaluator_means(const Corpus& corpus, Dimension dim);

struct CoverageRow {
  std::string label;  // domain name or "Total"
  std::size_t n_evaluators = 0;
  std::size_t n_patents = 0;
  std::size_t n_ideas = 0;
  std::size_t n_annotations = 0;
};

/// One row per domain followed by a totals row.
std::vector<CoverageRow> coverage_stats(const Corpus& corpus);

}  // namespace ideajudge
