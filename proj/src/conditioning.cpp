#include "ideajudge/conditioning.hpp"

#include <algorithm>
#include <set>

#include "ideajudge/errors.hpp"
#include "ideajudge/rng.hpp"

namespace ideajudge {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::zero_shot:
      return "zero_shot";
    case Condition::aggregate:
      return "aggregate";
    case Condition::personalized:
      return "personalized";
  }
  return "?";
}

Condition parse_condition(std::string_view s) {
  for (Condition c : kAllConditions) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown condition '" + std::string(s) +
                    "' (expected zero_shot, aggregate or personalized)");
}

std::string TargetInstance::key() const {
  return evaluator_id + "|" + idea_id + "|" + std::string(to_string(dimension));
}

TargetInstance make_target(const Corpus& corpus, const ScoreRecord& record) {
  const Patent& patent = corpus.patent_of(record.idea_id);
  return {record.evaluator_id, record.idea_id, record.dimension, patent.patent_id,
          patent.domain};
}

std::vector<ConditioningExample> candidate_pool(const Corpus& corpus,
                                                const TargetInstance& target,
                                                Condition condition) {
  std::vector<ConditioningExample> pool;
  if (condition == Condition::zero_shot) return pool;

  auto collect = [&](const Evaluator& e) {
    for (std::size_t i : corpus.scores_by_evaluator(e.evaluator_id, target.dimension)) {
      const ScoreRecord& r = corpus.scores()[i];
      const Patent& patent = corpus.patent_of(r.idea_id);
      if (patent.domain != target.domain || patent.patent_id == target.patent_id) continue;
      pool.push_back({r.evaluator_id, r.idea_id, patent.patent_id, patent.domain, r.dimension,
                      r.score});
    }
  };

  // Evaluators are sorted and each index list is in key order, so the pool
  // comes out in record-key order.
  for (const Evaluator& e : corpus.evaluators()) {
    bool same = e.evaluator_id == target.evaluator_id;
    if ((condition == Condition::personalized) == same) collect(e);
  }
  return pool;
}

ConditioningSet sample_set(std::span<const ConditioningExample> pool, Condition condition,
                           std::size_t shots, std::uint64_t seed) {
  ConditioningSet set{condition, shots, seed, {}};
  if (pool.size() < shots) throw InsufficientPoolError(pool.size(), shots);
  if (shots == 0) return set;

  // Partial Fisher-Yates over an index permutation.
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  StableRng rng(seed);
  for (std::size_t i = 0; i < shots; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
    set.examples.push_back(pool[order[i]]);
  }
  return set;
}

std::uint64_t conditioning_seed(std::uint64_t run_seed, const TargetInstance& target,
                                Condition condition, std::size_t shots) {
  std::string key = std::to_string(run_seed) + "#" + target.key() + "#" +
                    std::string(to_string(condition)) + "#" + std::to_string(shots);
  return fnv1a64(key);
}

ConditioningSet build_conditioning(const Corpus& corpus, const TargetInstance& target,
                                   Condition condition, std::size_t shots,
                                   std::uint64_t run_seed) {
  if (condition == Condition::zero_shot) shots = 0;
  auto pool = candidate_pool(corpus, target, condition);
  return sample_set(pool, condition, shots,
                    conditioning_seed(run_seed, target, condition, shots));
}

std::vector<TargetInstance> enumerate_targets(const Corpus& corpus, Dimension dimension,
                                              Domain domain) {
  std::vector<TargetInstance> out;
  for (const ScoreRecord& r : corpus.scores()) {
    if (r.dimension != dimension || corpus.idea_domain(r.idea_id) != domain) continue;
    out.push_back(make_target(corpus, r));
  }
  return out;
}

std::vector<std::string> conditioning_violations(const Corpus& corpus,
                                                 const TargetInstance& target,
                                                 const ConditioningSet& set) {
  std::vector<std::string> out;
  if (set.condition == Condition::zero_shot && !set.examples.empty()) {
    out.push_back("zero-shot set carries examples");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& ex : set.examples) {
    std::string tag = "example (" + ex.evaluator_id + ", " + ex.idea_id + ")";
    if (ex.dimension != target.dimension) out.push_back(tag + " has a different dimension");
    const Idea* idea = corpus.find_idea(ex.idea_id);
    if (!idea) {
      out.push_back(tag + " references an unknown idea");
      continue;
    }
    const Patent& patent = corpus.patent(idea->patent_id);
    if (patent.domain != target.domain) out.push_back(tag + " is from a different domain");
    if (ex.patent_id != patent.patent_id || ex.domain != patent.domain) {
      out.push_back(tag + " carries the wrong patent or domain");
    }
    if (patent.patent_id == target.patent_id) out.push_back(tag + " shares the target patent");
    if (set.condition == Condition::personalized) {
      if (ex.evaluator_id != target.evaluator_id) out.push_back(tag + " has another evaluator");
      if (ex.idea_id == target.idea_id) out.push_back(tag + " is the target idea");
    }
    if (set.condition == Condition::aggregate && ex.evaluator_id == target.evaluator_id) {
      out.push_back(tag + " is scored by the target evaluator");
    }
    auto recorded = corpus.score(ex.evaluator_id, ex.idea_id, ex.dimension);
    if (!recorded || *recorded != ex.score) out.push_back(tag + " does not match a human score");
    if (!seen.emplace(ex.evaluator_id, ex.idea_id).second) out.push_back(tag + " is repeated");
  }
  return out;
}

}  // namespace ideajudge
