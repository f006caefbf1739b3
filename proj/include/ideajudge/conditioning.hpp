#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ideajudge/corpus.hpp"

namespace ideajudge {

enum class Condition { zero_shot, aggregate, personalized };

inline constexpr std::array<Condition, 3> kAllConditions = {
    Condition::zero_shot, Condition::aggregate, Condition::personalized};

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view s);

/// An (evaluator, idea, dimension) instance the human actually scored.
struct TargetInstance {
  std::string evaluator_id;
  std::string idea_id;
  Dimension dimension = Dimension::specificity;
  std::string patent_id;
  Domain domain = Domain::nlp;

  /// "evaluator|idea|dimension"; unique per target.
  std::string key() const;
  bool operator==(const TargetInstance&) const = default;
};

/// A solved example: a human score plus the ids needed to render it.
struct ConditioningExample {
  std::string evaluator_id;
  std::string idea_id;
  std::string patent_id;
  Domain domain = Domain::nlp;
  Dimension dimension = Dimension::specificity;
  int score = 0;

  bool operator==(const ConditioningExample&) const = default;
};

struct ConditioningSet {
  Condition condition = Condition::zero_shot;
  std::size_t shots = 0;
  std::uint64_t seed = 0;
  /// In seeded sample order, which is also the prompt order.
  std::vector<ConditioningExample> examples;

  bool operator==(const ConditioningSet&) const = default;
};

/// Every scored instance eligible to condition `target`: same domain and
/// dimension, not grounded in the target patent, and scored by the target
/// evaluator (personalized) or by anyone else (aggregate). Zero-shot pools
/// are empty. Sorted by record key.
std::vector<ConditioningExample> candidate_pool(const Corpus& corpus,
                                                const TargetInstance& target,
                                                Condition condition);

/// Draws `shots` examples without replacement. Throws InsufficientPoolError
/// when the pool is too small.
ConditioningSet sample_set(std::span<const ConditioningExample> pool, Condition condition,
                           std::size_t shots, std::uint64_t seed);

/// Seed for one target's draw, derived from the run seed, the target key, the
/// condition and the shot count.
std::uint64_t conditioning_seed(std::uint64_t run_seed, const TargetInstance& target,
                                Condition condition, std::size_t shots);

/// candidate_pool + sample_set with a derived seed. Zero-shot ignores `shots`.
ConditioningSet build_conditioning(const Corpus& corpus, const TargetInstance& target,
                                   Condition condition, std::size_t shots,
                                   std::uint64_t run_seed);

/// One target per human score in the (domain, dimension) slice, in record-key
/// order.
std::vector<TargetInstance> enumerate_targets(const Corpus& corpus, Dimension dimension,
                                              Domain domain);

TargetInstance make_target(const Corpus& corpus, const ScoreRecord& record);

/// Descriptions of broken conditioning invariants; empty when the set is valid.
std::vector<std::string> conditioning_violations(const Corpus& corpus,
                                                 const TargetInstance& target,
                                                 const ConditioningSet& set);

}  // namespace ideajudge
