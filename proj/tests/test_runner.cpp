#include <doctest.h>

#include <atomic>
#include <mutex>

#include "ideajudge/errors.hpp"
#include "ideajudge/runner.hpp"
#include "ideajudge/synthetic.hpp"
#include "support.hpp"

using namespace ideajudge;
namespace ts = testsupport;

namespace {

// Two evaluators score four ideas on two patents each; plenty for 1-shot runs.
Corpus small_corpus() {
  std::vector<Patent> patents;
  std::vector<Idea> ideas;
  std::vector<ScoreRecord> scores;
  for (int p = 1; p <= 4; ++p) {
    auto pid = "P" + std::to_string(p);
    patents.push_back(ts::patent(pid));
    auto iid = "I" + std::to_string(p);
    ideas.push_back(ts::idea(iid, pid, "common words plus " + pid));
    scores.push_back(ts::score("A", iid, Dimension::innovativeness, p));
    if (p <= 2) scores.push_back(ts::score("B", iid, Dimension::innovativeness, 5 - p));
  }
  return Corpus::build(patents, ideas, {ts::evaluator("A"), ts::evaluator("B")}, scores);
}

RunSpec spec_for(Condition c, std::size_t shots) {
  RunSpec s;
  s.dimension = Dimension::innovativeness;
  s.domain = Domain::nlp;
  s.condition = c;
  s.shots = shots;
  return s;
}

// Replies with a confidence chosen per idea and counts calls.
struct Scripted : JudgeBackend {
  std::map<std::string, std::vector<int>> confidences;  // idea -> per-call confidences
  std::map<std::string, int> next;
  std::mutex mu;
  std::atomic<int> calls{0};
  std::string id() const override { return "scripted"; }
  std::string invoke(const JudgeRequest& r) override {
    ++calls;
    std::lock_guard lock(mu);
    int conf = 95;
    if (auto it = confidences.find(r.target.idea_id); it != confidences.end()) {
      conf = it->second[static_cast<std::size_t>(next[r.target.idea_id]++) % it->second.size()];
    }
    return R"({"score": 2, "reason": "scripted", "confidence": )" + std::to_string(conf) + "}";
  }
};

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("four targets and three seeds give twelve predictions") {
  auto c = Corpus::build({ts::patent("P1"), ts::patent("P2")},
                         {ts::idea("I1", "P1"), ts::idea("I2", "P2")},
                         {ts::evaluator("A"), ts::evaluator("B")},
                         {ts::score("A", "I1", Dimension::innovativeness, 2),
                          ts::score("A", "I2", Dimension::innovativeness, 3),
                          ts::score("B", "I1", Dimension::innovativeness, 4),
                          ts::score("B", "I2", Dimension::innovativeness, 5)});
  MockKnnBackend mock;
  auto a = run_condition(c, spec_for(Condition::aggregate, 1), mock);
  CHECK(a.predictions.size() == 12);
  CHECK(a.outcomes.size() == 4);
  CHECK(a.final_scores().size() == 4);
  CHECK(a.backend_calls == 12);
  CHECK(a.count(OutcomeStatus::scored) == 4);
  for (const auto& p : a.predictions) {
    CHECK(p.backend_id == "mock_knn");
    CHECK(p.confidence == kMockConfidence);
    CHECK_FALSE(p.discarded);
  }
}

TEST_CASE("a target whose predictions are all filtered becomes missing") {
  auto c = small_corpus();
  Scripted s;
  s.confidences["I1"] = {10, 20, 79};
  s.confidences["I2"] = {90, 50, 85};
  auto a = run_condition(c, spec_for(Condition::zero_shot, 0), s);
  auto finals = a.final_scores();
  CHECK(finals.count("A|I1|innovativeness") == 0);
  CHECK(finals.count("B|I1|innovativeness") == 0);
  CHECK(finals.count("A|I2|innovativeness") == 1);
  CHECK(a.count(OutcomeStatus::no_surviving_prediction) == 2);
  // I1: 6 discarded; I2: 2 of 6 discarded; I3, I4: none of 6.
  CHECK(*a.discard_rate() == doctest::Approx(8.0 / 18.0));
}

TEST_CASE("insufficient pools skip the target with a reason") {
  auto c = small_corpus();
  MockKnnBackend mock;
  auto a = run_condition(c, spec_for(Condition::personalized, 3), mock);
  // A has 3 other ideas, B only 1.
  for (const auto& o : a.outcomes) {
    if (o.target.evaluator_id == "B") {
      CHECK(o.status == OutcomeStatus::skipped);
      CHECK(o.detail.find("insufficient conditioning pool") != std::string::npos);
    } else {
      CHECK(o.status == OutcomeStatus::scored);
    }
  }
  auto big = run_condition(c, spec_for(Condition::personalized, 9), mock);
  CHECK(big.count(OutcomeStatus::skipped) == big.outcomes.size());
  CHECK(big.final_scores().empty());
  CHECK(big.backend_calls == 0);
}

TEST_CASE("backend and format failures are recorded, not fatal") {
  struct Failing : JudgeBackend {
    std::string id() const override { return "failing"; }
    std::string invoke(const JudgeRequest& r) override {
      if (r.target.idea_id == "I1") throw TransportError("down");
      if (r.target.idea_id == "I2") return "not json";
      return R"({"score": 3, "reason": "ok", "confidence": 90})";
    }
  } failing;
  auto c = small_corpus();
  auto a = run_condition(c, spec_for(Condition::zero_shot, 0), failing);
  CHECK(a.failures.size() == 12);
  std::set<std::string> kinds;
  for (const auto& f : a.failures) kinds.insert(f.error);
  CHECK(kinds == std::set<std::string>{"transport", "no_json"});
  CHECK(a.final_scores().size() == 2);
}

TEST_CASE("configuration errors abort") {
  auto c = small_corpus();
  MockKnnBackend mock;
  auto s = spec_for(Condition::zero_shot, 0);
  s.seeds.clear();
  CHECK_THROWS_AS(run_condition(c, s, mock), ConfigError);
  s = spec_for(Condition::zero_shot, 0);
  s.confidence_threshold = 101;
  CHECK_THROWS_AS(run_condition(c, s, mock), ConfigError);
}

TEST_CASE("artifacts serialize and parse back") {
  auto c = small_corpus();
  MockKnnBackend mock;
  auto a = run_condition(c, spec_for(Condition::personalized, 1), mock);
  auto text = serialize_run_artifact(a);
  auto back = parse_run_artifact(text);
  CHECK(back.predictions == a.predictions);
  CHECK(back.outcomes == a.outcomes);
  CHECK(back.failures == a.failures);
  CHECK(back.backend_calls == a.backend_calls);
  CHECK(serialize_run_artifact(back) == text);
  CHECK(artifact_filename(a.spec) == "innovativeness__NLP__personalized__1shot.jsonl");

  auto dir = ts::temp_dir("artifact");
  write_run_artifact(a, dir / "a.jsonl");
  CHECK(serialize_run_artifact(read_run_artifact(dir / "a.jsonl")) == text);
  CHECK_THROWS_AS(parse_run_artifact("{\"kind\": \"prediction\"}\n"), ParseError);
}

TEST_CASE("runs are byte-identical across repeats and worker counts") {
  CohortSpec cohort;
  auto corpus = generate_corpus(6, 3, make_policies(cohort, 5), 5);
  MockKnnBackend mock;
  auto s = spec_for(Condition::personalized, 3);
  auto one = serialize_run_artifact(run_condition(corpus, s, mock));
  CHECK(serialize_run_artifact(run_condition(corpus, s, mock)) == one);
  s.workers = 4;
  CHECK(serialize_run_artifact(run_condition(corpus, s, mock)) == one);
}

TEST_CASE("replaying a recorded run reproduces it without the original backend") {
  CohortSpec cohort;
  auto corpus = generate_corpus(5, 3, make_policies(cohort, 9), 9);
  auto dir = ts::temp_dir("replay_run");
  BackendConfig record;
  record.cache_path = dir / "cache.jsonl";
  auto s = spec_for(Condition::aggregate, 2);
  s.backend = record;
  auto recorder = make_backend(record);
  auto original = run_condition(corpus, s, *recorder);

  BackendConfig replay = record;
  replay.kind = BackendKind::replay;
  auto r = spec_for(Condition::aggregate, 2);
  r.backend = replay;
  auto replayer = make_backend(replay);
  auto again = run_condition(corpus, r, *replayer);
  CHECK(again.predictions == original.predictions);
  CHECK(again.outcomes == original.outcomes);
  CHECK(again.failures.empty());
  CHECK(serialize_run_artifact(run_condition(corpus, r, *replayer)) ==
        serialize_run_artifact(again));
}

TEST_CASE("personalized and aggregate make the same number of calls") {
  CohortSpec cohort;
  auto corpus = generate_corpus(6, 4, make_policies(cohort, 1), 1);
  Scripted p;
  Scripted a;
  auto pr = run_condition(corpus, spec_for(Condition::personalized, 3), p);
  auto ar = run_condition(corpus, spec_for(Condition::aggregate, 3), a);
  // Every target that has a full pool costs one call per seed under either condition.
  CHECK(pr.outcomes.size() == ar.outcomes.size());
  for (const auto* r : {&pr, &ar}) {
    std::size_t attempted = r->outcomes.size() - r->count(OutcomeStatus::skipped);
    CHECK(attempted > 0);
    CHECK(r->backend_calls == attempted * kDefaultSeeds.size());
  }
  CHECK(p.calls == static_cast<int>(pr.backend_calls));
  CHECK(a.calls == static_cast<int>(ar.backend_calls));
}

TEST_CASE("every stored prediction satisfies its invariants") {
  CohortSpec cohort;
  auto corpus = generate_corpus(6, 3, make_policies(cohort, 2), 2);
  MockKnnBackend mock;
  for (auto cond : kAllConditions) {
    for (auto dim : kAllDimensions) {
      auto s = spec_for(cond, cond == Condition::zero_shot ? 0 : 2);
      s.dimension = dim;
      auto a = run_condition(corpus, s, mock);
      for (const auto& p : a.predictions) {
        CHECK(dimension_spec(dim).in_scale(p.score));
        CHECK(p.confidence >= 0);
        CHECK(p.confidence <= 100);
        CHECK(p.discarded == (p.confidence < s.confidence_threshold));
        CHECK(p.dimension == dim);
      }
    }
  }
}

}  // TEST_SUITE
