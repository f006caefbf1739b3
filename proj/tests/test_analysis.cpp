#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ideajudge/analysis.hpp"
#include "ideajudge/errors.hpp"
#include "ideajudge/synthetic.hpp"
#include "support.hpp"

using namespace ideajudge;
namespace ts = testsupport;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      row.push_back(field);
      rows.push_back(row);
      row.clear();
      field.clear();
    } else {
      field += c;
    }
  }
  return rows;
}

// Every value in the CSV rendering equals the JSON rendering's value.
void check_renderings_agree(const Table& t) {
  auto csv = parse_csv(t.to_csv());
  auto json = t.to_json();
  REQUIRE(csv.size() == t.rows.size() + 1);
  CHECK(csv[0] == t.columns);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& obj = json["rows"][r];
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& v = obj[t.columns[c]];
      const auto& cell = csv[r + 1][c];
      if (v.is_null()) {
        CHECK(cell == "--");
      } else if (v.is_string()) {
        CHECK(cell == v.get<std::string>());
      } else if (v.is_number_integer()) {
        CHECK(cell == std::to_string(v.get<long long>()));
      } else {
        CHECK(std::stod(cell) == v.get<double>());
        CHECK(cell == format_real(v.get<double>()));
      }
    }
  }
}

TargetOutcome scored(const Corpus& c, const std::string& e, const std::string& i, Dimension d,
                     std::optional<int> final_score) {
  TargetOutcome o;
  o.target = make_target(c, ScoreRecord{e, i, d, *c.score(e, i, d), std::nullopt});
  o.final_score = final_score;
  o.status = final_score ? OutcomeStatus::scored : OutcomeStatus::no_surviving_prediction;
  return o;
}

RunArtifact artifact(Dimension d, Condition cond, std::size_t shots) {
  RunArtifact a;
  a.spec.dimension = d;
  a.spec.domain = Domain::nlp;
  a.spec.condition = cond;
  a.spec.shots = shots;
  return a;
}

// Evaluators A, B, C over four ideas on four patents, innovativeness only.
Corpus four_items(const std::map<std::string, std::vector<int>>& by_evaluator) {
  std::vector<Patent> patents;
  std::vector<Idea> ideas;
  std::vector<Evaluator> evaluators;
  std::vector<ScoreRecord> scores;
  const std::vector<std::string> ids = {"A", "B", "C", "D"};
  for (const auto& id : ids) {
    patents.push_back(ts::patent("P" + id));
    ideas.push_back(ts::idea(id, "P" + id));
  }
  for (const auto& [e, vals] : by_evaluator) {
    evaluators.push_back(ts::evaluator(e));
    for (std::size_t i = 0; i < vals.size(); ++i) {
      scores.push_back(ts::score(e, ids[i], Dimension::innovativeness, vals[i]));
    }
  }
  return Corpus::build(patents, ideas, evaluators, scores);
}

JudgePrediction reason_pred(const std::string& e, const std::string& i, Dimension d,
                            const std::string& reason) {
  JudgePrediction p;
  p.evaluator_id = e;
  p.idea_id = i;
  p.dimension = d;
  p.condition = Condition::personalized;
  p.shots = 3;
  p.score = 1;
  p.reason = reason;
  p.confidence = 95;
  return p;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("tables render identical values to CSV and JSON") {
  Table t;
  t.name = "demo";
  t.columns = {"name", "count", "value", "missing"};
  t.add_row({std::string("plain"), std::int64_t{3}, 0.12345, Cell{}});
  t.add_row({std::string("with, comma \"quoted\""), std::int64_t{-1}, -0.0004, 2.0 / 3.0});
  t.add_row({std::string("x"), std::int64_t{0}, 1.0, -1.0});
  check_renderings_agree(t);
  CHECK(t.to_csv().find("0.123,--") != std::string::npos);
  CHECK(t.to_csv().find("0.000") != std::string::npos);
  CHECK(t.to_csv().find("-0.000") == std::string::npos);
  CHECK(t.to_json()["rows"][0]["missing"].is_null());
  CHECK_THROWS(t.add_row({std::string("short")}));

  auto dir = ts::temp_dir("tables");
  write_table(t, dir);
  CHECK(std::filesystem::exists(dir / "demo.csv"));
  CHECK(std::filesystem::exists(dir / "demo.json"));
}

TEST_CASE("noiseless identical evaluators give alpha 1 in the disagreement table") {
  std::vector<EvaluatorPolicy> ps(3);
  for (int i = 0; i < 3; ++i) ps[i].evaluator_id = "E" + std::to_string(i);
  auto c = generate_corpus(12, 4, ps, 3);
  auto cells = disagreement_cells(c);
  int defined = 0;
  for (const auto& cell : cells) {
    if (cell.domain != Domain::nlp) {
      CHECK_FALSE(cell.alpha);
      CHECK_FALSE(cell.coarse_jaccard);
      continue;
    }
    if (cell.alpha) {
      CHECK(*cell.alpha == 1.0);
      ++defined;
    }
    if (cell.coarse_jaccard) CHECK(*cell.coarse_jaccard == 1.0);
  }
  CHECK(defined >= 4);
  auto t = disagreement_report(c);
  CHECK(t.columns.size() == 7);
  CHECK(t.rows.size() == 6);
  check_renderings_agree(t);
  check_renderings_agree(disagreement_detail(cells));
}

TEST_CASE("pairs sharing fewer than ten items leave the coarse cell unavailable") {
  std::vector<Patent> patents;
  std::vector<Idea> ideas;
  std::vector<ScoreRecord> scores;
  for (int i = 0; i < 12; ++i) {
    auto id = std::to_string(i);
    patents.push_back(ts::patent("P" + id));
    ideas.push_back(ts::idea("I" + id, "P" + id));
    if (i < 11) scores.push_back(ts::score("A", "I" + id, Dimension::innovativeness, 1 + i % 5));
    if (i >= 2) scores.push_back(ts::score("B", "I" + id, Dimension::innovativeness, 1 + i % 4));
  }
  auto c = Corpus::build(patents, ideas, {ts::evaluator("A"), ts::evaluator("B")}, scores);
  auto t = disagreement_report(c);
  auto csv = parse_csv(t.to_csv());
  // Row 3 is innovativeness; column 4 is jaccard_NLP.
  CHECK(csv[3][0] == "innovativeness");
  CHECK(csv[3][4] == "--");
  CHECK(csv[3][1] != "--");
  // With the rule relaxed to nine the pair qualifies.
  auto relaxed = parse_csv(disagreement_report(c, DistanceMetric::ordinal, 9).to_csv());
  CHECK(relaxed[3][4] != "--");
}

TEST_CASE("feeding experts their own scores gives alpha 1") {
  CohortSpec spec;
  spec.noise_scale = 0.5;
  auto c = generate_corpus(10, 4, make_policies(spec, 6), 6);
  for (auto d : kAllDimensions) {
    auto p = expert_self_check(c, d, Domain::nlp);
    REQUIRE(p.alpha_pooled);
    CHECK(*p.alpha_pooled == 1.0);
    REQUIRE(p.alpha_per_evaluator);
    CHECK(*p.alpha_per_evaluator == 1.0);
    CHECK(p.n_scored == p.n_targets);
  }
}

TEST_CASE("pooled alpha of a constant zero-shot judge matches the oracle") {
  CohortSpec spec;
  spec.noise_scale = 0.4;
  auto c = generate_corpus(8, 4, make_policies(spec, 2), 2);
  MockKnnBackend mock;
  RunSpec s;
  s.dimension = Dimension::innovativeness;
  s.condition = Condition::zero_shot;
  auto a = run_condition(c, s, mock);
  auto p = alignment_point(c, a);

  ts::Grid grid;
  for (const auto& o : a.outcomes) {
    int expert = *c.score(o.target.evaluator_id, o.target.idea_id, o.target.dimension);
    grid.push_back({expert, *o.final_score});
    CHECK(*o.final_score == 3);
  }
  auto expected = ts::brute_alpha(grid, {1, 2, 3, 4, 5}, DistanceMetric::ordinal);
  REQUIRE(expected);
  REQUIRE(p.alpha_pooled);
  CHECK(*p.alpha_pooled == doctest::Approx(*expected).epsilon(1e-12));
  CHECK(p.primary_variant() == "pooled");
}

TEST_CASE("shots beyond every pool produce an empty, flagged point") {
  CohortSpec spec;
  auto c = generate_corpus(3, 2, make_policies(spec, 1), 1);
  MockKnnBackend mock;
  RunSpec s;
  s.dimension = Dimension::specificity;
  s.condition = Condition::personalized;
  s.shots = 50;
  auto a = run_condition(c, s, mock);
  auto p = alignment_point(c, a);
  CHECK(p.empty());
  CHECK(p.n_skipped == p.n_targets);
  CHECK_FALSE(p.alpha_pooled);
  CHECK_FALSE(p.alpha_per_evaluator);
  std::vector<AlignmentPoint> points = {p};
  auto t = alignment_table(points);
  CHECK(t.to_csv().find(",empty\n") != std::string::npos);
  check_renderings_agree(t);
}

TEST_CASE("per-evaluator and pooled alpha are both reported") {
  auto c = four_items({{"X", {4, 3, 2, 1}}, {"Y", {1, 2, 3, 4}}});
  std::vector<TargetInstance> targets = enumerate_targets(c, Dimension::innovativeness, Domain::nlp);
  std::map<std::string, int> finals;
  for (const auto& t : targets) {
    finals[t.key()] = *c.score(t.evaluator_id, t.idea_id, t.dimension);
  }
  finals["Y|D|innovativeness"] = 1;  // one disagreement for Y
  auto p = alignment_from_scores(c, targets, finals);
  CHECK(p.n_evaluators == 2);
  CHECK(p.n_evaluators_defined == 2);
  REQUIRE(p.alpha_per_evaluator);
  REQUIRE(p.alpha_pooled);
  CHECK(*p.alpha_per_evaluator < 1.0);
  CHECK(*p.alpha_pooled < 1.0);

  ts::Grid x = {{4, 4}, {3, 3}, {2, 2}, {1, 1}};
  ts::Grid y = {{1, 1}, {2, 2}, {3, 3}, {4, 1}};
  auto ax = *ts::brute_alpha(x, {1, 2, 3, 4, 5}, DistanceMetric::ordinal);
  auto ay = *ts::brute_alpha(y, {1, 2, 3, 4, 5}, DistanceMetric::ordinal);
  CHECK(*p.alpha_per_evaluator == doctest::Approx((ax + ay) / 2).epsilon(1e-12));
  ts::Grid pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  CHECK(*p.alpha_pooled ==
        doctest::Approx(*ts::brute_alpha(pooled, {1, 2, 3, 4, 5}, DistanceMetric::ordinal)));
}

TEST_CASE("alignment curves put shots on the x-axis") {
  std::vector<AlignmentPoint> pts(5);
  pts[0].condition = Condition::zero_shot;
  pts[0].alpha_pooled = -0.1;
  pts[1].condition = Condition::aggregate;
  pts[1].shots = 1;
  pts[1].alpha_pooled = 0.1;
  pts[2].condition = Condition::personalized;
  pts[2].shots = 1;
  pts[2].alpha_per_evaluator = 0.2;
  pts[3].condition = Condition::aggregate;
  pts[3].shots = 9;
  pts[3].alpha_pooled = 0.15;
  pts[4].condition = Condition::personalized;
  pts[4].shots = 9;
  pts[4].alpha_per_evaluator = 0.5;
  auto curves = alignment_curves(pts);
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].name == "alignment_curve_specificity");
  CHECK(curves[0].to_csv() ==
        "domain,shots,zero_shot,aggregate,personalized\n"
        "NLP,1,-0.100,0.100,0.200\n"
        "NLP,9,-0.100,0.150,0.500\n");
}

TEST_CASE("coarse metrics against hand-computed values") {
  auto c = four_items({{"X", {4, 3, 2, 1}}});
  auto a = artifact(Dimension::innovativeness, Condition::personalized, 3);
  a.outcomes = {scored(c, "X", "A", Dimension::innovativeness, 4),
                scored(c, "X", "B", Dimension::innovativeness, 1),
                scored(c, "X", "C", Dimension::innovativeness, 3),
                scored(c, "X", "D", Dimension::innovativeness, 2)};
  std::vector<RunArtifact> runs = {a};
  auto rows = coarse_judge_report(c, runs);
  REQUIRE(rows.size() == 1);
  // Above-median sets {A, B} vs {A, C}; top halves the same.
  CHECK(*rows[0].jaccard == doctest::Approx(1.0 / 3.0));
  CHECK(*rows[0].top_half == 0.5);
  CHECK(rows[0].shots == 3);
  check_renderings_agree(coarse_table(rows));
}

TEST_CASE("a judge that copies the experts scores 1 on both coarse metrics") {
  CohortSpec spec;
  spec.noise_scale = 0.5;
  auto c = generate_corpus(6, 4, make_policies(spec, 3), 3);
  std::vector<RunArtifact> runs;
  for (auto d : kAllDimensions) {
    auto a = artifact(d, Condition::aggregate, 5);
    for (const auto& t : enumerate_targets(c, d, Domain::nlp)) {
      a.outcomes.push_back(scored(c, t.evaluator_id, t.idea_id, d,
                                  *c.score(t.evaluator_id, t.idea_id, d)));
    }
    runs.push_back(a);
  }
  for (const auto& r : coarse_judge_report(c, runs)) {
    CHECK(*r.jaccard == 1.0);
    CHECK(*r.top_half == 1.0);
  }
}

TEST_CASE("a constant judge has an empty above-median set") {
  auto c = four_items({{"X", {4, 3, 2, 1}}, {"Y", {2, 2, 2, 2}}});
  auto a = artifact(Dimension::innovativeness, Condition::zero_shot, 0);
  for (const char* e : {"X", "Y"}) {
    for (const char* i : {"A", "B", "C", "D"}) {
      a.outcomes.push_back(scored(c, e, i, Dimension::innovativeness, 3));
    }
  }
  std::vector<RunArtifact> runs = {a};
  auto rows = coarse_judge_report(c, runs);
  // X has a non-empty expert set, so 0; Y's expert set is empty too, so 1.
  CHECK(*rows[0].jaccard == 0.5);
  CHECK(rows[0].n_jaccard == 2);
}

TEST_CASE("coarse report needs matching artifacts") {
  auto c = four_items({{"X", {4, 3, 2, 1}}});
  std::vector<RunArtifact> none;
  CHECK_THROWS_AS(coarse_judge_report(c, none), Error);
  std::vector<RunArtifact> runs = {artifact(Dimension::innovativeness, Condition::aggregate, 3)};
  CHECK_THROWS_AS(coarse_judge_report(c, runs, 9), Error);
  CHECK_NOTHROW(coarse_judge_report(c, runs, 3));
}

TEST_CASE("reasoning study points") {
  // A and B agree exactly; C does not. The judge's reasons for A and B
  // match, those for C share no words with them.
  auto c = four_items({{"A", {1, 2, 3, 4}}, {"B", {1, 2, 3, 4}}, {"C", {4, 1, 1, 2}}});
  auto a = artifact(Dimension::innovativeness, Condition::personalized, 3);
  for (const char* i : {"A", "B", "C", "D"}) {
    a.predictions.push_back(reason_pred("A", i, Dimension::innovativeness, "solid clear plan"));
    a.predictions.push_back(reason_pred("B", i, Dimension::innovativeness, "solid clear plan"));
    a.predictions.push_back(reason_pred("C", i, Dimension::innovativeness, "vague weak market"));
  }
  auto dropped = reason_pred("A", "A", Dimension::innovativeness, "ignored text");
  dropped.discarded = true;
  a.predictions.push_back(dropped);

  HashEmbedding emb(512);
  std::vector<const RunArtifact*> runs = {&a};
  auto r = reasoning_similarity_study(c, runs, emb);
  REQUIRE(r.points.size() == 3);
  const auto& ab = r.points[0];
  CHECK(ab.evaluator_a == "A");
  CHECK(ab.evaluator_b == "B");
  CHECK(ab.shared_instances == 4);
  CHECK(ab.alpha == 1.0);
  CHECK(ab.cosine == doctest::Approx(1.0).epsilon(1e-12));
  const auto& ac = r.points[1];
  CHECK(ac.evaluator_b == "C");
  CHECK(std::abs(ac.cosine) < 1e-12);
  REQUIRE(r.pearson);
  CHECK(*r.pearson > 0.9);

  std::vector<ReasoningResult> results = {r};
  check_renderings_agree(reasoning_points_table(results));
  auto summary = reasoning_summary_table(results, emb);
  CHECK(summary.metadata["reason_aggregation"] == "mean_of_embeddings");
  check_renderings_agree(summary);
}

TEST_CASE("reasoning study needs two qualifying pairs") {
  auto c = four_items({{"A", {1, 2, 3, 4}}, {"B", {1, 2, 3, 3}}});
  auto a = artifact(Dimension::innovativeness, Condition::personalized, 3);
  for (const char* i : {"A", "B", "C", "D"}) {
    a.predictions.push_back(reason_pred("A", i, Dimension::innovativeness, "one"));
    a.predictions.push_back(reason_pred("B", i, Dimension::innovativeness, "two"));
  }
  HashEmbedding emb;
  std::vector<const RunArtifact*> runs = {&a};
  CHECK_THROWS_AS(reasoning_similarity_study(c, runs, emb), InsufficientDataError);
  auto results = reasoning_by_condition(c, std::vector<RunArtifact>{a}, emb, std::nullopt);
  REQUIRE(results.size() == 1);
  CHECK_FALSE(results[0].error.empty());
  CHECK_FALSE(results[0].pearson);
}

TEST_CASE("hash embeddings") {
  HashEmbedding emb(64);
  auto a = emb.embed("The quick brown fox");
  CHECK(a == emb.embed("the QUICK, brown fox!"));
  double norm = 0;
  for (double x : a) norm += x * x;
  CHECK(norm == doctest::Approx(1.0));
  auto z = emb.embed("");
  CHECK(std::all_of(z.begin(), z.end(), [](double x) { return x == 0.0; }));
  CHECK(emb.id() == "deterministic_hash:64");
  CHECK_THROWS_AS(HashEmbedding(0), ConfigError);
}

TEST_CASE("http embeddings are requested once per text") {
  int calls = 0;
  HttpTransport fake = [&](const HttpRequest& r) {
    ++calls;
    auto body = nlohmann::json::parse(r.body);
    CHECK(body["model"] == "emb");
    CHECK(body["input"].size() == 1);
    CHECK(r.path == "/v1/embeddings");
    return HttpResponse{200, R"({"data": [{"embedding": [0.5, 0.25, 0.0]}]})"};
  };
  EmbeddingConfig cfg;
  cfg.kind = EmbeddingKind::http_embedding;
  cfg.endpoint = "http://emb.invalid";
  cfg.model = "emb";
  cfg.dimension = 3;
  HttpEmbedding emb(cfg, fake);
  auto v = emb.embed("text");
  CHECK(v == std::vector<double>{0.5, 0.25, 0.0});
  CHECK(emb.embed("text") == v);
  CHECK(calls == 1);
  emb.embed("other");
  CHECK(calls == 2);

  cfg.dimension = 4;
  HttpEmbedding wrong(cfg, fake);
  CHECK_THROWS_AS(wrong.embed("x"), TransportError);
}

TEST_CASE("study config from JSON") {
  auto c = StudyConfig::from_json(nlohmann::json::parse(R"({
    "corpus_dir": "data/corpus", "dimension": ["innovativeness", "market_size"],
    "domain": "NLP", "condition": "all", "shots": [1, 9], "seeds": [4],
    "backend": "mock_knn", "confidence_threshold": 70, "metric": "interval",
    "out": "reports", "embedding_dim": 128, "report_shots": 9
  })"));
  CHECK(c.dimensions == std::vector<Dimension>{Dimension::innovativeness, Dimension::market_size});
  CHECK(c.domains == std::vector<Domain>{Domain::nlp});
  CHECK(c.conditions.size() == 3);
  CHECK(c.shots == std::vector<std::size_t>{1, 9});
  CHECK(c.confidence_threshold == 70);
  CHECK(c.metric == DistanceMetric::interval);
  CHECK(c.embedding.dimension == 128);
  CHECK(*c.report_shots == 9);
  CHECK(c.resolved_runs_dir() == std::filesystem::path("reports") / "runs");
  CHECK_NOTHROW(c.validate());

  auto again = StudyConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  CHECK_THROWS_AS(StudyConfig::from_json(nlohmann::json::parse(R"({"shotz": [1]})")), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json(nlohmann::json::parse(R"({"dimension": "novelty"})")),
                  Error);
  CHECK_THROWS_AS(StudyConfig::from_json(nlohmann::json::parse(R"({"shots": [-1]})")), ConfigError);

  StudyConfig bad;
  bad.shots.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.conditions = {Condition::zero_shot};
  CHECK_NOTHROW(bad.validate());
  StudyConfig thr;
  thr.confidence_threshold = 150;
  CHECK_THROWS_AS(thr.validate(), ConfigError);
}

TEST_CASE("run specs cover the grid for domains with ideas") {
  CohortSpec spec;
  auto c = generate_corpus(3, 2, make_policies(spec, 1), 1, Domain::cs);
  StudyConfig cfg;
  cfg.shots = {1, 3};
  auto specs = cfg.run_specs(c);
  // 6 dimensions x (1 zero-shot + 2 aggregate + 2 personalized), CS only.
  CHECK(specs.size() == 30);
  for (const auto& s : specs) {
    CHECK(s.domain == Domain::cs);
    if (s.condition == Condition::zero_shot) CHECK(s.shots == 0);
  }
}

}  // TEST_SUITE
