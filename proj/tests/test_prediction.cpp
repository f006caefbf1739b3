#include <doctest.h>

#include "ideajudge/prediction.hpp"
#include "support.hpp"

using namespace ideajudge;

namespace {

PredictionErrorKind kind_of(const std::string& raw, Dimension d = Dimension::innovativeness) {
  try {
    parse_prediction(raw, d);
  } catch (const PredictionFormatError& e) {
    return e.kind();
  }
  FAIL("expected a format error for " << raw);
  return PredictionErrorKind::no_json;
}

JudgePrediction pred(int confidence, Dimension d = Dimension::specificity,
                     Domain dom = Domain::nlp) {
  JudgePrediction p;
  p.evaluator_id = "E";
  p.idea_id = "I";
  p.dimension = d;
  p.domain = dom;
  p.score = 2;
  p.confidence = confidence;
  return p;
}

}  // namespace

TEST_SUITE("prediction") {

TEST_CASE("well-formed output parses") {
  auto p = parse_prediction(R"({"score": 3, "reason": "clear", "confidence": 85})",
                            Dimension::innovativeness);
  CHECK(p.score == 3);
  CHECK(p.reason == "clear");
  CHECK(p.confidence == 85);
}

TEST_CASE("prose before the JSON line is skipped") {
  auto p = parse_prediction(
      "Let me think {about it}.\nHere is my answer:\n"
      R"({"score": 2, "reason": "a {brace} inside", "confidence": 90})"
      "\nThanks",
      Dimension::innovativeness);
  CHECK(p.score == 2);
  CHECK(p.reason == "a {brace} inside");
}

TEST_CASE("the first object with all three keys wins") {
  auto p = parse_prediction(R"({"note": 1} {"score": 4, "reason": "r", "confidence": 80} )"
                            R"({"score": 1, "reason": "s", "confidence": 99})",
                            Dimension::innovativeness);
  CHECK(p.score == 4);
}

TEST_CASE("integral floats are accepted, fractions rejected") {
  CHECK(parse_prediction(R"({"score": 3.0, "reason": "r", "confidence": 85})",
                         Dimension::innovativeness)
            .score == 3);
  CHECK(kind_of(R"({"score": 3.5, "reason": "r", "confidence": 85})") ==
        PredictionErrorKind::non_integral);
}

TEST_CASE("format errors are classified") {
  CHECK(kind_of("no json here") == PredictionErrorKind::no_json);
  CHECK(kind_of("") == PredictionErrorKind::no_json);
  CHECK(kind_of(R"({"score": 3, "reason": "r"})") == PredictionErrorKind::missing_key);
  CHECK(kind_of(R"({"score": 6, "reason": "r", "confidence": 85})") ==
        PredictionErrorKind::out_of_scale);
  CHECK(kind_of(R"({"score": 0, "reason": "r", "confidence": 85})") ==
        PredictionErrorKind::out_of_scale);
  CHECK(kind_of(R"({"score": 4, "reason": "r", "confidence": 85})", Dimension::market_size) ==
        PredictionErrorKind::out_of_scale);
  CHECK(kind_of(R"({"score": "3", "reason": "r", "confidence": 85})") ==
        PredictionErrorKind::wrong_type);
  CHECK(kind_of(R"({"score": 3, "reason": 7, "confidence": 85})") ==
        PredictionErrorKind::wrong_type);
  CHECK(kind_of(R"({"score": 3, "reason": "r", "confidence": 101})") ==
        PredictionErrorKind::bad_confidence);
  CHECK(kind_of(R"({"score": 3, "reason": "r", "confidence": -1})") ==
        PredictionErrorKind::bad_confidence);
  CHECK(kind_of(R"({"score": 3, "reason": "r", "confidence": 85.5})") ==
        PredictionErrorKind::bad_confidence);
}

TEST_CASE("confidence filter") {
  SUBCASE("one of three below the threshold") {
    auto r = confidence_filter({pred(85), pred(90), pred(79)});
    CHECK(r.kept.size() == 2);
    REQUIRE(r.discarded.size() == 1);
    CHECK(r.discarded[0].discarded);
    CHECK(r.discarded[0].confidence == 79);
    CHECK(*r.discard_rate == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("threshold itself is kept") {
    auto r = confidence_filter({pred(80), pred(100)});
    CHECK(r.discarded.empty());
    CHECK(*r.discard_rate == 0.0);
  }
  SUBCASE("empty input has no rate") {
    CHECK_FALSE(confidence_filter({}).discard_rate.has_value());
  }
  SUBCASE("custom threshold") {
    CHECK(confidence_filter({pred(50), pred(60)}, 55).discarded.size() == 1);
  }
}

TEST_CASE("discard rates per slice") {
  std::vector<JudgePrediction> ps = {pred(10), pred(90), pred(95, Dimension::market_size),
                                     pred(20, Dimension::market_size, Domain::cs)};
  auto rates = discard_rates(ps);
  CHECK(*rates.at({Dimension::specificity, Domain::nlp}) == 0.5);
  CHECK(*rates.at({Dimension::market_size, Domain::nlp}) == 0.0);
  CHECK(*rates.at({Dimension::market_size, Domain::cs}) == 1.0);
}

TEST_CASE("majority vote examples") {
  CHECK(majority_vote(std::vector<int>{3, 3, 2}) == 3);
  CHECK(majority_vote(std::vector<int>{2, 3, 4}) == 3);
  CHECK_FALSE(majority_vote(std::vector<int>{}).has_value());
  CHECK(majority_vote(std::vector<int>{1, 4}) == 1);
  CHECK(majority_vote(std::vector<int>{5, 1, 5, 1}) == 1);
  CHECK(majority_vote(std::vector<int>{2}) == 2);
}

TEST_CASE("majority vote over every 3-score multiset on 1..5") {
  int n = 0;
  for (int a = 1; a <= 5; ++a) {
    for (int b = a; b <= 5; ++b) {
      for (int c = b; c <= 5; ++c) {
        std::vector<int> s = {c, a, b};
        CHECK(*majority_vote(s) == testsupport::oracle_vote(s));
        ++n;
      }
    }
  }
  CHECK(n == 35);
}

}  // TEST_SUITE
