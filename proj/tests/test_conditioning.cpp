#include <doctest.h>

#include <random>

#include "ideajudge/conditioning.hpp"
#include "ideajudge/errors.hpp"
#include "ideajudge/synthetic.hpp"
#include "support.hpp"

using namespace ideajudge;
namespace ts = testsupport;

namespace {

// Three NLP patents with three ideas each plus one CS patent; evaluators A, B
// and C score every NLP idea on innovativeness, D scores the CS ideas.
Corpus fixture() {
  std::vector<Patent> patents = {ts::patent("P1"), ts::patent("P2"), ts::patent("P3"),
                                 ts::patent("Q1", Domain::cs)};
  std::vector<Idea> ideas;
  std::vector<ScoreRecord> scores;
  int k = 0;
  for (const char* p : {"P1", "P2", "P3", "Q1"}) {
    for (int i = 1; i <= 3; ++i) {
      std::string id = std::string(p) + "-I" + std::to_string(i);
      ideas.push_back(ts::idea(id, p));
      if (p[0] == 'Q') {
        scores.push_back(ts::score("D", id, Dimension::innovativeness, 1 + k % 5));
      } else {
        for (const char* e : {"A", "B", "C"}) {
          scores.push_back(ts::score(e, id, Dimension::innovativeness, 1 + (k++) % 5));
        }
        scores.push_back(ts::score("A", id, Dimension::specificity, 4));
      }
    }
  }
  return Corpus::build(patents, ideas,
                       {ts::evaluator("A"), ts::evaluator("B"), ts::evaluator("C"),
                        ts::evaluator("D", Domain::cs)},
                       scores);
}

TargetInstance target_of(const Corpus& c, const std::string& e, const std::string& i,
                         Dimension d = Dimension::innovativeness) {
  return make_target(c, ScoreRecord{e, i, d, *c.score(e, i, d), std::nullopt});
}

}  // namespace

TEST_SUITE("conditioning") {

TEST_CASE("personalized pool holds only the target evaluator, off the target patent") {
  auto c = fixture();
  auto t = target_of(c, "A", "P1-I1");
  auto pool = candidate_pool(c, t, Condition::personalized);
  CHECK(pool.size() == 6);
  for (const auto& ex : pool) {
    CHECK(ex.evaluator_id == "A");
    CHECK(ex.patent_id != "P1");
    CHECK(ex.dimension == Dimension::innovativeness);
    CHECK(ex.domain == Domain::nlp);
  }
}

TEST_CASE("aggregate pool excludes the target evaluator") {
  auto c = fixture();
  auto t = target_of(c, "A", "P1-I1");
  auto pool = candidate_pool(c, t, Condition::aggregate);
  CHECK(pool.size() == 12);
  for (const auto& ex : pool) {
    CHECK(ex.evaluator_id != "A");
    CHECK(ex.patent_id != "P1");
    CHECK(ex.domain == Domain::nlp);
  }
  CHECK(std::is_sorted(pool.begin(), pool.end(), [](const auto& x, const auto& y) {
    return std::tie(x.evaluator_id, x.idea_id) < std::tie(y.evaluator_id, y.idea_id);
  }));
}

TEST_CASE("zero-shot pool is empty") {
  auto c = fixture();
  CHECK(candidate_pool(c, target_of(c, "A", "P1-I1"), Condition::zero_shot).empty());
  auto set = build_conditioning(c, target_of(c, "A", "P1-I1"), Condition::zero_shot, 5, 0);
  CHECK(set.examples.empty());
  CHECK(set.shots == 0);
}

TEST_CASE("sampling sizes and shortfall") {
  std::vector<ConditioningExample> pool;
  for (int i = 0; i < 9; ++i) {
    pool.push_back({"E", "I" + std::to_string(i), "P" + std::to_string(i), Domain::nlp,
                    Dimension::innovativeness, 1 + i % 5});
  }
  CHECK(sample_set(pool, Condition::personalized, 0, 1).examples.empty());

  auto all = sample_set(pool, Condition::personalized, 9, 1);
  REQUIRE(all.examples.size() == 9);
  auto sorted = all.examples;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.idea_id < b.idea_id; });
  CHECK(sorted == pool);

  std::vector<ConditioningExample> five(pool.begin(), pool.begin() + 5);
  try {
    sample_set(five, Condition::personalized, 9, 1);
    FAIL("expected an insufficient pool");
  } catch (const InsufficientPoolError& e) {
    CHECK(e.shortfall() == 4);
    CHECK(std::string(e.what()).find("short by 4") != std::string::npos);
  }
}

TEST_CASE("distinct seeds give distinct samples") {
  std::vector<ConditioningExample> pool;
  for (int i = 0; i < 12; ++i) {
    pool.push_back({"E", "I" + std::to_string(i), "P", Domain::nlp, Dimension::specificity, 1});
  }
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = sample_set(pool, Condition::aggregate, 5, seed);
    std::vector<std::string> ids;
    for (const auto& e : s.examples) ids.push_back(e.idea_id);
    seen.insert(ids);
    CHECK(sample_set(pool, Condition::aggregate, 5, seed) == s);
  }
  CHECK(seen.size() >= 2);
}

TEST_CASE("the derived seed depends on every component") {
  auto c = fixture();
  auto t = target_of(c, "A", "P1-I1");
  auto u = target_of(c, "B", "P1-I1");
  auto base = conditioning_seed(0, t, Condition::personalized, 3);
  CHECK(base == conditioning_seed(0, t, Condition::personalized, 3));
  CHECK(base != conditioning_seed(1, t, Condition::personalized, 3));
  CHECK(base != conditioning_seed(0, u, Condition::personalized, 3));
  CHECK(base != conditioning_seed(0, t, Condition::aggregate, 3));
  CHECK(base != conditioning_seed(0, t, Condition::personalized, 5));
}

TEST_CASE("targets mirror the human scores in the slice") {
  auto c = fixture();
  CHECK(enumerate_targets(c, Dimension::innovativeness, Domain::nlp).size() == 27);
  CHECK(enumerate_targets(c, Dimension::innovativeness, Domain::cs).size() == 3);
  CHECK(enumerate_targets(c, Dimension::specificity, Domain::nlp).size() == 9);
  CHECK(enumerate_targets(c, Dimension::market_size, Domain::nlp).empty());
  CHECK(enumerate_targets(c, Dimension::innovativeness, Domain::matchem).empty());
  auto t = enumerate_targets(c, Dimension::innovativeness, Domain::cs);
  CHECK(t[0].patent_id == "Q1");
  CHECK(t[0].key() == "D|Q1-I1|innovativeness");
}

TEST_CASE("condition names") {
  for (auto cnd : kAllConditions) CHECK(parse_condition(to_string(cnd)) == cnd);
  CHECK_THROWS_AS(parse_condition("few_shot"), ConfigError);
}

TEST_CASE("random draws never break the conditioning invariants") {
  std::mt19937_64 rng(2024);
  int built = 0;
  int short_pools = 0;
  for (int corpus_seed = 0; corpus_seed < 10; ++corpus_seed) {
    CohortSpec spec;
    spec.n_evaluators = 3 + corpus_seed % 4;
    spec.noise_scale = 0.5;
    auto corpus = generate_corpus(4 + corpus_seed % 3, 3, make_policies(spec, corpus_seed),
                                  corpus_seed);
    const auto& scores = corpus.scores();
    for (int draw = 0; draw < 100; ++draw) {
      const auto& rec = scores[rng() % scores.size()];
      auto target = make_target(corpus, rec);
      auto cond = kAllConditions[rng() % 3];
      std::size_t shots = rng() % 13;
      std::uint64_t seed = rng() % 5;
      auto pool = candidate_pool(corpus, target, cond);
      try {
        auto set = build_conditioning(corpus, target, cond, shots, seed);
        ++built;
        CHECK(conditioning_violations(corpus, target, set).empty());
        for (const auto& ex : set.examples) {
          bool is_target = ex.evaluator_id == rec.evaluator_id && ex.idea_id == rec.idea_id;
          CHECK_FALSE(is_target);
        }
        CHECK(build_conditioning(corpus, target, cond, shots, seed) == set);
      } catch (const InsufficientPoolError& e) {
        ++short_pools;
        CHECK(cond != Condition::zero_shot);
        CHECK(pool.size() < shots);
        CHECK(e.shortfall() == shots - pool.size());
      }
    }
  }
  CHECK(built > 500);
  CHECK(short_pools > 0);
}

TEST_CASE("violation checker catches broken sets") {
  auto c = fixture();
  auto t = target_of(c, "A", "P1-I1");
  auto set = build_conditioning(c, t, Condition::personalized, 3, 0);
  CHECK(conditioning_violations(c, t, set).empty());
  auto leaked = set;
  leaked.examples[0].patent_id = "P1";
  CHECK_FALSE(conditioning_violations(c, t, leaked).empty());
  auto wrong = set;
  wrong.condition = Condition::aggregate;
  CHECK_FALSE(conditioning_violations(c, t, wrong).empty());
  auto dup = set;
  dup.examples[1] = dup.examples[0];
  CHECK_FALSE(conditioning_violations(c, t, dup).empty());
}

}  // TEST_SUITE
