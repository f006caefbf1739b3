#include "ideajudge/runner.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "ideajudge/errors.hpp"

namespace ideajudge {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::scored:
      return "scored";
    case OutcomeStatus::skipped:
      return "skipped";
    case OutcomeStatus::no_surviving_prediction:
      return "no_surviving_prediction";
  }
  return "?";
}

namespace {

OutcomeStatus parse_status(std::string_view s) {
  for (auto st : {OutcomeStatus::scored, OutcomeStatus::skipped,
                  OutcomeStatus::no_surviving_prediction}) {
    if (to_string(st) == s) return st;
  }
  throw ParseError("unknown outcome status '" + std::string(s) + "'");
}

}  // namespace

ordered_json RunSpec::to_json() const {
  ordered_json j;
  j["dimension"] = to_string(dimension);
  j["domain"] = to_string(domain);
  j["condition"] = to_string(condition);
  j["shots"] = shots;
  j["seeds"] = seeds;
  j["confidence_threshold"] = confidence_threshold;
  j["render"] = {{"patent_char_budget", render.patent_char_budget},
                 {"include_example_patents", render.include_example_patents}};
  j["backend"] = backend.to_json();
  return j;
}

RunSpec RunSpec::from_json(const nlohmann::json& j) {
  RunSpec s;
  s.dimension = parse_dimension(j.at("dimension").get<std::string>());
  s.domain = parse_domain(j.at("domain").get<std::string>());
  s.condition = parse_condition(j.at("condition").get<std::string>());
  s.shots = j.at("shots").get<std::size_t>();
  s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  s.confidence_threshold = j.value("confidence_threshold", kDefaultConfidenceThreshold);
  if (j.contains("render")) {
    const auto& r = j["render"];
    s.render.patent_char_budget = r.value("patent_char_budget", s.render.patent_char_budget);
    s.render.include_example_patents =
        r.value("include_example_patents", s.render.include_example_patents);
  }
  if (j.contains("backend")) s.backend = BackendConfig::from_json(j["backend"]);
  return s;
}

std::map<std::string, int> RunArtifact::final_scores() const {
  std::map<std::string, int> out;
  for (const auto& o : outcomes) {
    if (o.final_score) out[o.target.key()] = *o.final_score;
  }
  return out;
}

std::size_t RunArtifact::count(OutcomeStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      outcomes.begin(), outcomes.end(), [&](const auto& o) { return o.status == status; }));
}

std::optional<double> RunArtifact::discard_rate() const {
  if (predictions.empty()) return std::nullopt;
  auto dropped = std::count_if(predictions.begin(), predictions.end(),
                               [](const auto& p) { return p.discarded; });
  return static_cast<double>(dropped) / static_cast<double>(predictions.size());
}

namespace {

struct TargetResult {
  std::vector<JudgePrediction> predictions;
  std::vector<CallFailure> failures;
  TargetOutcome outcome;
  std::size_t calls = 0;
};

std::string error_kind(const BackendError& e) {
  if (dynamic_cast<const TimeoutError*>(&e)) return "timeout";
  if (dynamic_cast<const ReplayMissError*>(&e)) return "replay_miss";
  if (dynamic_cast<const TransportError*>(&e)) return "transport";
  return "backend";
}

TargetResult run_target(const Corpus& corpus, const RunSpec& spec, JudgeBackend& backend,
                        const TargetInstance& target) {
  TargetResult result;
  result.outcome.target = target;
  const std::string key = target.key();
  const std::string backend_id = backend.id();

  for (std::uint64_t seed : spec.seeds) {
    ConditioningSet conditioning;
    try {
      conditioning = build_conditioning(corpus, target, spec.condition, spec.shots, seed);
    } catch (const InsufficientPoolError& e) {
      // The pool does not depend on the seed, so no other seed can succeed.
      result.predictions.clear();
      result.failures.clear();
      result.outcome.status = OutcomeStatus::skipped;
      result.outcome.detail = e.what();
      return result;
    }
    PromptBundle bundle = render_prompt(corpus, target, conditioning, spec.render);

    std::string raw;
    try {
      ++result.calls;
      raw = backend.invoke({corpus, target, conditioning, bundle});
    } catch (const BackendError& e) {
      result.failures.push_back({key, seed, error_kind(e), e.what()});
      continue;
    }

    ParsedPrediction parsed;
    try {
      parsed = parse_prediction(raw, target.dimension);
    } catch (const PredictionFormatError& e) {
      result.failures.push_back({key, seed, std::string(to_string(e.kind())), e.what()});
      continue;
    }
    JudgePrediction p;
    p.evaluator_id = target.evaluator_id;
    p.idea_id = target.idea_id;
    p.dimension = target.dimension;
    p.domain = target.domain;
    p.condition = spec.condition;
    p.shots = conditioning.shots;
    p.seed = seed;
    p.score = parsed.score;
    p.reason = std::move(parsed.reason);
    p.confidence = parsed.confidence;
    p.backend_id = backend_id;
    result.predictions.push_back(std::move(p));
  }

  auto filtered = confidence_filter(result.predictions, spec.confidence_threshold);
  for (auto& p : result.predictions) p.discarded = p.confidence < spec.confidence_threshold;
  std::vector<int> votes;
  for (const auto& p : filtered.kept) votes.push_back(p.score);
  if (auto final_score = majority_vote(votes)) {
    result.outcome.status = OutcomeStatus::scored;
    result.outcome.final_score = final_score;
  } else {
    result.outcome.status = OutcomeStatus::no_surviving_prediction;
    result.outcome.detail = result.predictions.empty()
                                ? "every call failed"
                                : "all predictions fell below the confidence threshold";
  }
  return result;
}

}  // namespace

RunArtifact run_condition(const Corpus& corpus, const RunSpec& spec, JudgeBackend& backend) {
  if (spec.seeds.empty()) throw ConfigError("at least one seed is required");
  if (spec.confidence_threshold < 0 || spec.confidence_threshold > 100) {
    throw ConfigError("confidence threshold must lie in [0, 100]");
  }

  RunArtifact artifact;
  artifact.spec = spec;
  if (spec.condition == Condition::zero_shot) artifact.spec.shots = 0;
  const auto targets = enumerate_targets(corpus, spec.dimension, spec.domain);
  std::vector<TargetResult> results(targets.size());

  std::size_t workers = backend.concurrent() ? std::max<std::size_t>(spec.workers, 1) : 1;
  workers = std::min(workers, std::max<std::size_t>(targets.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      results[i] = run_target(corpus, artifact.spec, backend, targets[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < targets.size(); i = next++) {
          try {
            results[i] = run_target(corpus, artifact.spec, backend, targets[i]);
          } catch (...) {
            std::lock_guard lock(fatal_mu);
            if (!fatal) fatal = std::current_exception();
            next = targets.size();
          }
        }
      });
    }
    pool.clear();
    if (fatal) std::rethrow_exception(fatal);
  }

  // Results are indexed by target, so assembly order never depends on timing.
  for (auto& r : results) {
    artifact.backend_calls += r.calls;
    std::move(r.predictions.begin(), r.predictions.end(),
              std::back_inserter(artifact.predictions));
    std::move(r.failures.begin(), r.failures.end(), std::back_inserter(artifact.failures));
    artifact.outcomes.push_back(std::move(r.outcome));
  }

  const auto skipped = artifact.count(OutcomeStatus::skipped);
  const auto missing = artifact.count(OutcomeStatus::no_surviving_prediction);
  if (skipped || missing || !artifact.failures.empty()) {
    spdlog::info("{} {} {} {}-shot: {} targets, {} skipped, {} without surviving prediction, {} "
                 "failed calls",
                 to_string(spec.dimension), to_string(spec.domain), to_string(spec.condition),
                 artifact.spec.shots, targets.size(), skipped, missing,
                 artifact.failures.size());
  }
  return artifact;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_run_artifact(const RunArtifact& a) {
  std::ostringstream out;
  ordered_json header;
  header["kind"] = "header";
  header["format"] = 1;
  header["config"] = a.spec.to_json();
  ordered_json summary;
  summary["targets"] = a.outcomes.size();
  summary["scored"] = a.count(OutcomeStatus::scored);
  summary["skipped"] = a.count(OutcomeStatus::skipped);
  summary["no_surviving_prediction"] = a.count(OutcomeStatus::no_surviving_prediction);
  summary["predictions"] = a.predictions.size();
  summary["failed_calls"] = a.failures.size();
  summary["backend_calls"] = a.backend_calls;
  if (auto rate = a.discard_rate()) {
    summary["discard_rate"] = *rate;
  } else {
    summary["discard_rate"] = nullptr;
  }
  header["summary"] = summary;
  out << header.dump() << '\n';

  for (const auto& p : a.predictions) {
    ordered_json j;
    j["kind"] = "prediction";
    j["evaluator_id"] = p.evaluator_id;
    j["idea_id"] = p.idea_id;
    j["dimension"] = to_string(p.dimension);
    j["domain"] = to_string(p.domain);
    j["condition"] = to_string(p.condition);
    j["shots"] = p.shots;
    j["seed"] = p.seed;
    j["score"] = p.score;
    j["reason"] = p.reason;
    j["confidence"] = p.confidence;
    j["backend_id"] = p.backend_id;
    j["discarded"] = p.discarded;
    out << j.dump() << '\n';
  }
  for (const auto& f : a.failures) {
    ordered_json j{{"kind", "failure"},
                   {"target", f.target_key},
                   {"seed", f.seed},
                   {"error", f.error},
                   {"message", f.message}};
    out << j.dump() << '\n';
  }
  for (const auto& o : a.outcomes) {
    ordered_json j;
    j["kind"] = "outcome";
    j["evaluator_id"] = o.target.evaluator_id;
    j["idea_id"] = o.target.idea_id;
    j["dimension"] = to_string(o.target.dimension);
    j["patent_id"] = o.target.patent_id;
    j["domain"] = to_string(o.target.domain);
    j["status"] = to_string(o.status);
    if (o.final_score) {
      j["final_score"] = *o.final_score;
    } else {
      j["final_score"] = nullptr;
    }
    j["detail"] = o.detail;
    out << j.dump() << '\n';
  }
  return out.str();
}

RunArtifact parse_run_artifact(std::string_view text) {
  RunArtifact a;
  bool have_header = false;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ParseError("run artifact line " + std::to_string(lineno) + ": invalid JSON", lineno);
    }
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        a.spec = RunSpec::from_json(j.at("config"));
        a.backend_calls = j.at("summary").value("backend_calls", std::size_t{0});
        have_header = true;
      } else if (kind == "prediction") {
        JudgePrediction p;
        p.evaluator_id = j.at("evaluator_id").get<std::string>();
        p.idea_id = j.at("idea_id").get<std::string>();
        p.dimension = parse_dimension(j.at("dimension").get<std::string>());
        p.domain = parse_domain(j.at("domain").get<std::string>());
        p.condition = parse_condition(j.at("condition").get<std::string>());
        p.shots = j.at("shots").get<std::size_t>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.score = j.at("score").get<int>();
        p.reason = j.at("reason").get<std::string>();
        p.confidence = j.at("confidence").get<int>();
        p.backend_id = j.at("backend_id").get<std::string>();
        p.discarded = j.at("discarded").get<bool>();
        a.predictions.push_back(std::move(p));
      } else if (kind == "failure") {
        a.failures.push_back({j.at("target").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                              j.at("error").get<std::string>(),
                              j.at("message").get<std::string>()});
      } else if (kind == "outcome") {
        TargetOutcome o;
        o.target.evaluator_id = j.at("evaluator_id").get<std::string>();
        o.target.idea_id = j.at("idea_id").get<std::string>();
        o.target.dimension = parse_dimension(j.at("dimension").get<std::string>());
        o.target.patent_id = j.at("patent_id").get<std::string>();
        o.target.domain = parse_domain(j.at("domain").get<std::string>());
        o.status = parse_status(j.at("status").get<std::string>());
        if (!j.at("final_score").is_null()) o.final_score = j.at("final_score").get<int>();
        o.detail = j.value("detail", std::string());
        a.outcomes.push_back(std::move(o));
      } else {
        throw ParseError("unknown record kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("run artifact line " + std::to_string(lineno) + ": " + e.what(), lineno);
    } catch (const Error& e) {
      throw ParseError("run artifact line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
  if (!have_header) throw ParseError("run artifact has no header line");
  return a;
}

void write_run_artifact(const RunArtifact& artifact, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_run_artifact(artifact);
}

RunArtifact read_run_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read run artifact " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_run_artifact(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what(), e.line());
  }
}

std::string artifact_filename(const RunSpec& spec) {
  std::size_t shots = spec.condition == Condition::zero_shot ? 0 : spec.shots;
  return std::string(to_string(spec.dimension)) + "__" + std::string(to_string(spec.domain)) +
         "__" + std::string(to_string(spec.condition)) + "__" + std::to_string(shots) +
         "shot.jsonl";
}

}  // namespace ideajudge
