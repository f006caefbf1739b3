#include "ideajudge/analysis.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "ideajudge/errors.hpp"

namespace ideajudge {

namespace {

using Triples = std::vector<std::tuple<std::string, std::string, int>>;

std::vector<std::string> string_list(const nlohmann::json& v, const char* key) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(std::string("'") + key + "' entries must be strings");
      out.push_back(e.get<std::string>());
    }
  } else {
    throw ConfigError(std::string("'") + key + "' must be a string or a list of strings");
  }
  return out;
}

template <typename T, typename Parse, typename All>
std::vector<T> name_list(const nlohmann::json& v, const char* key, Parse parse, const All& all) {
  auto names = string_list(v, key);
  if (names.size() == 1 && names[0] == "all") return {all.begin(), all.end()};
  std::vector<T> out;
  for (const auto& n : names) {
    T value = parse(n);
    if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(value);
  }
  return out;
}

template <typename T>
std::vector<T> number_list(const nlohmann::json& v, const char* key) {
  std::vector<T> out;
  auto take = [&](const nlohmann::json& e) {
    if (!e.is_number_integer() || e.get<long long>() < 0) {
      throw ConfigError(std::string("'") + key + "' entries must be non-negative integers");
    }
    out.push_back(e.get<T>());
  };
  if (v.is_array()) {
    for (const auto& e : v) take(e);
  } else {
    take(v);
  }
  return out;
}

std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Alpha that treats "no pairable unit" the same as "undefined".
std::optional<double> try_alpha(const Triples& triples, Dimension dim, DistanceMetric metric) {
  if (triples.empty()) return std::nullopt;
  try {
    auto matrix = RatingMatrix::from_triples(triples, dimension_spec(dim).value_domain());
    return krippendorff_alpha(matrix, metric).alpha;
  } catch (const InsufficientDataError&) {
    return std::nullopt;
  }
}

Cell name_cell(std::string_view s) { return std::string(s); }
Cell count_cell(std::size_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

// ---------------------------------------------------------------------------
// StudyConfig

std::filesystem::path StudyConfig::resolved_runs_dir() const {
  return runs_dir.empty() ? out_dir / "runs" : runs_dir;
}

void StudyConfig::validate() const {
  if (dimensions.empty()) throw ConfigError("no dimension selected");
  if (domains.empty()) throw ConfigError("no domain selected");
  if (conditions.empty()) throw ConfigError("no condition selected");
  bool few_shot = std::any_of(conditions.begin(), conditions.end(),
                              [](Condition c) { return c != Condition::zero_shot; });
  if (few_shot && shots.empty()) {
    throw ConfigError("few-shot conditions need a non-empty shot list (--shots)");
  }
  if (few_shot && std::find(shots.begin(), shots.end(), 0) != shots.end()) {
    throw ConfigError("shot counts for few-shot conditions must be positive");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required (--seeds)");
  if (confidence_threshold < 0 || confidence_threshold > 100) {
    throw ConfigError("--confidence-threshold must lie in [0, 100]");
  }
  if (workers == 0) throw ConfigError("--workers must be at least 1");
  if (report_shots && *report_shots == 0) throw ConfigError("--report-shots must be positive");
}

nlohmann::ordered_json StudyConfig::to_json() const {
  nlohmann::ordered_json j;
  j["corpus_dir"] = corpus_dir.string();
  auto names = [](const auto& xs) {
    std::vector<std::string> out;
    for (auto x : xs) out.emplace_back(to_string(x));
    return out;
  };
  j["dimension"] = names(dimensions);
  j["domain"] = names(domains);
  j["condition"] = names(conditions);
  j["shots"] = shots;
  j["seeds"] = seeds;
  j["backend"] = to_string(backend.kind);
  j["cache"] = backend.cache_path.string();
  j["replay_source"] = backend.replay_source;
  j["mock_neighbors"] = backend.mock_neighbors;
  j["endpoint"] = backend.endpoint;
  j["path"] = backend.path;
  j["model"] = backend.model;
  j["api_key_env"] = backend.api_key_env;
  j["temperature"] = backend.temperature;
  j["timeout"] = backend.timeout_seconds;
  j["max_retries"] = backend.max_retries;
  j["backoff_ms"] = backend.backoff_ms;
  j["confidence_threshold"] = confidence_threshold;
  j["patent_budget"] = render.patent_char_budget;
  j["no_example_patents"] = !render.include_example_patents;
  j["out"] = out_dir.string();
  j["runs"] = runs_dir.string();
  j["metric"] = to_string(metric);
  j["embedding"] = to_string(embedding.kind);
  j["embedding_dim"] = embedding.dimension;
  j["embedding_endpoint"] = embedding.endpoint;
  j["embedding_model"] = embedding.model;
  j["workers"] = workers;
  if (report_shots) {
    j["report_shots"] = *report_shots;
  } else {
    j["report_shots"] = nullptr;
  }
  j["min_overlap"] = min_overlap;
  j["median_rule"] = median_rule == MedianRule::strict ? "strict" : "inclusive";
  return j;
}

StudyConfig StudyConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("study config must be a JSON object");
  StudyConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "corpus_dir") {
        c.corpus_dir = v.get<std::string>();
      } else if (key == "dimension") {
        c.dimensions = name_list<Dimension>(v, "dimension", parse_dimension, kAllDimensions);
      } else if (key == "domain") {
        c.domains = name_list<Domain>(v, "domain", parse_domain, kAllDomains);
      } else if (key == "condition") {
        c.conditions = name_list<Condition>(v, "condition", parse_condition, kAllConditions);
      } else if (key == "shots") {
        c.shots = number_list<std::size_t>(v, "shots");
      } else if (key == "seeds") {
        c.seeds = number_list<std::uint64_t>(v, "seeds");
      } else if (key == "backend") {
        c.backend.kind = parse_backend_kind(v.get<std::string>());
      } else if (key == "cache") {
        c.backend.cache_path = v.get<std::string>();
      } else if (key == "replay_source") {
        c.backend.replay_source = v.get<std::string>();
      } else if (key == "mock_neighbors") {
        c.backend.mock_neighbors = v.get<std::size_t>();
      } else if (key == "endpoint") {
        c.backend.endpoint = v.get<std::string>();
      } else if (key == "path") {
        c.backend.path = v.get<std::string>();
      } else if (key == "model") {
        c.backend.model = v.get<std::string>();
      } else if (key == "api_key_env") {
        c.backend.api_key_env = v.get<std::string>();
        c.embedding.api_key_env = c.backend.api_key_env;
      } else if (key == "temperature") {
        c.backend.temperature = v.get<double>();
      } else if (key == "timeout") {
        c.backend.timeout_seconds = v.get<double>();
        c.embedding.timeout_seconds = c.backend.timeout_seconds;
      } else if (key == "max_retries") {
        c.backend.max_retries = v.get<int>();
        c.embedding.max_retries = c.backend.max_retries;
      } else if (key == "backoff_ms") {
        c.backend.backoff_ms = v.get<int>();
        c.embedding.backoff_ms = c.backend.backoff_ms;
      } else if (key == "confidence_threshold") {
        c.confidence_threshold = v.get<int>();
      } else if (key == "patent_budget") {
        c.render.patent_char_budget = v.get<std::size_t>();
      } else if (key == "no_example_patents") {
        c.render.include_example_patents = !v.get<bool>();
      } else if (key == "out") {
        c.out_dir = v.get<std::string>();
      } else if (key == "runs") {
        c.runs_dir = v.get<std::string>();
      } else if (key == "metric") {
        c.metric = parse_metric(v.get<std::string>());
      } else if (key == "embedding") {
        c.embedding.kind = parse_embedding_kind(v.get<std::string>());
      } else if (key == "embedding_dim") {
        c.embedding.dimension = v.get<std::size_t>();
      } else if (key == "embedding_endpoint") {
        c.embedding.endpoint = v.get<std::string>();
      } else if (key == "embedding_model") {
        c.embedding.model = v.get<std::string>();
      } else if (key == "workers") {
        c.workers = v.get<std::size_t>();
      } else if (key == "report_shots") {
        if (!v.is_null()) c.report_shots = v.get<std::size_t>();
      } else if (key == "min_overlap") {
        c.min_overlap = v.get<std::size_t>();
      } else if (key == "median_rule") {
        auto s = v.get<std::string>();
        if (s == "strict") {
          c.median_rule = MedianRule::strict;
        } else if (s == "inclusive") {
          c.median_rule = MedianRule::inclusive;
        } else {
          throw ConfigError("median_rule must be strict or inclusive");
        }
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value in study config: ") + e.what());
  }
  return c;
}

StudyConfig StudyConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  return from_json(j);
}

std::vector<RunSpec> StudyConfig::run_specs(const Corpus& corpus) const {
  std::set<Domain> present;
  for (const auto& p : corpus.patents()) {
    if (!corpus.ideas_by_patent(p.patent_id).empty()) present.insert(p.domain);
  }
  std::vector<RunSpec> specs;
  for (Dimension dim : dimensions) {
    for (Domain dom : domains) {
      if (!present.count(dom)) continue;
      for (Condition cond : conditions) {
        std::vector<std::size_t> counts =
            cond == Condition::zero_shot ? std::vector<std::size_t>{0} : shots;
        for (std::size_t k : counts) {
          RunSpec s;
          s.dimension = dim;
          s.domain = dom;
          s.condition = cond;
          s.shots = k;
          s.seeds = seeds;
          s.confidence_threshold = confidence_threshold;
          s.render = render;
          s.backend = backend;
          s.workers = workers;
          specs.push_back(std::move(s));
        }
      }
    }
  }
  return specs;
}

// ---------------------------------------------------------------------------
// Expert disagreement

std::vector<DisagreementCell> disagreement_cells(const Corpus& corpus, DistanceMetric metric,
                                                 std::size_t min_overlap, MedianRule rule) {
  std::vector<DisagreementCell> cells;
  for (Dimension dim : kAllDimensions) {
    for (Domain dom : kAllDomains) {
      DisagreementCell cell;
      cell.dimension = dim;
      cell.domain = dom;

      Triples triples;
      std::map<std::string, std::map<std::string, int>> by_owner;
      for (const auto& r : corpus.scores()) {
        if (r.dimension != dim || corpus.idea_domain(r.idea_id) != dom) continue;
        triples.emplace_back(r.idea_id, r.evaluator_id, r.score);
        by_owner[r.evaluator_id][r.idea_id] = r.score;
      }
      cell.n_evaluators = by_owner.size();

      if (triples.empty()) {
        cell.alpha_status = "insufficient";
      } else {
        try {
          auto matrix = RatingMatrix::from_triples(triples, dimension_spec(dim).value_domain());
          auto report = krippendorff_alpha(matrix, metric);
          cell.alpha = report.alpha;
          cell.n_units = report.n_units_used;
          cell.alpha_status = report.undefined() ? "undefined" : "ok";
        } catch (const InsufficientDataError&) {
          cell.alpha_status = "insufficient";
        }
      }

      std::vector<OwnerSelection> owners;
      for (const auto& [owner, scores] : by_owner) {
        OwnerSelection sel;
        sel.owner = owner;
        sel.selected = above_median_set(scores, rule);
        for (const auto& [item, _] : scores) sel.scored.insert(item);
        owners.push_back(std::move(sel));
      }
      auto pj = pairwise_jaccard(owners, min_overlap);
      cell.coarse_jaccard = pj.mean;
      cell.qualifying_pairs = pj.qualifying();
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

Table disagreement_report(const Corpus& corpus, DistanceMetric metric, std::size_t min_overlap,
                          MedianRule rule) {
  auto cells = disagreement_cells(corpus, metric, min_overlap, rule);
  Table t;
  t.name = "disagreement";
  t.columns = {"dimension"};
  for (Domain d : kAllDomains) t.columns.push_back("alpha_" + std::string(to_string(d)));
  for (Domain d : kAllDomains) t.columns.push_back("jaccard_" + std::string(to_string(d)));
  t.metadata["metric"] = to_string(metric);
  t.metadata["min_overlap"] = min_overlap;
  t.metadata["median_rule"] = rule == MedianRule::strict ? "strict" : "inclusive";
  for (Dimension dim : kAllDimensions) {
    std::vector<Cell> row{name_cell(to_string(dim))};
    std::vector<Cell> jac;
    for (const auto& c : cells) {
      if (c.dimension != dim) continue;
      row.push_back(optional_cell(c.alpha));
      jac.push_back(optional_cell(c.coarse_jaccard));
    }
    row.insert(row.end(), jac.begin(), jac.end());
    t.add_row(std::move(row));
  }
  return t;
}

Table disagreement_detail(std::span<const DisagreementCell> cells) {
  Table t;
  t.name = "disagreement_detail";
  t.columns = {"dimension", "domain",         "alpha",           "alpha_status",
               "n_units",   "n_evaluators",   "coarse_jaccard",  "qualifying_pairs"};
  for (const auto& c : cells) {
    t.add_row({name_cell(to_string(c.dimension)), name_cell(to_string(c.domain)),
               optional_cell(c.alpha), c.alpha_status, count_cell(c.n_units),
               count_cell(c.n_evaluators), optional_cell(c.coarse_jaccard),
               count_cell(c.qualifying_pairs)});
  }
  return t;
}

Table coverage_table(const Corpus& corpus) {
  Table t;
  t.name = "coverage";
  t.columns = {"domain", "evaluators", "patents", "ideas", "annotations"};
  for (const auto& r : coverage_stats(corpus)) {
    t.add_row({r.label, count_cell(r.n_evaluators), count_cell(r.n_patents),
               count_cell(r.n_ideas), count_cell(r.n_annotations)});
  }
  return t;
}

Table evaluator_means_table(const Corpus& corpus) {
  Table t;
  t.name = "evaluator_means";
  t.columns = {"evaluator", "domain", "background"};
  for (Dimension d : kAllDimensions) t.columns.emplace_back(to_string(d));
  std::vector<std::map<std::string, double>> means;
  for (Dimension d : kAllDimensions) means.push_back(evaluator_means(corpus, d));
  for (const auto& e : corpus.evaluators()) {
    std::vector<Cell> row{e.evaluator_id, name_cell(to_string(e.domain)),
                          name_cell(to_string(e.background))};
    for (const auto& m : means) {
      auto it = m.find(e.evaluator_id);
      row.push_back(it == m.end() ? Cell{} : Cell{it->second});
    }
    t.add_row(std::move(row));
  }
  return t;
}

Table violations_table(std::span<const Violation> violations) {
  Table t;
  t.name = "violations";
  t.columns = {"evaluator", "idea", "failed_gates", "offending"};
  auto join = [](const std::vector<Dimension>& ds) {
    std::string s;
    for (Dimension d : ds) {
      if (!s.empty()) s += ';';
      s += to_string(d);
    }
    return s;
  };
  for (const auto& v : violations) {
    t.add_row({v.evaluator_id, v.idea_id, join(v.failed_gates), join(v.offending)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Judge alignment

std::optional<double> AlignmentPoint::primary_alpha() const {
  return condition == Condition::personalized ? alpha_per_evaluator : alpha_pooled;
}

std::string_view AlignmentPoint::primary_variant() const {
  return condition == Condition::personalized ? "per_evaluator_mean" : "pooled";
}

AlignmentPoint alignment_from_scores(const Corpus& corpus, std::span<const TargetInstance> targets,
                                     const std::map<std::string, int>& finals,
                                     DistanceMetric metric) {
  AlignmentPoint p;
  if (!targets.empty()) {
    p.dimension = targets.front().dimension;
    p.domain = targets.front().domain;
  }
  p.n_targets = targets.size();

  std::map<std::string, Triples> per_evaluator;
  Triples pooled;
  for (const auto& t : targets) {
    auto expert = corpus.score(t.evaluator_id, t.idea_id, t.dimension);
    if (!expert) throw Error("target " + t.key() + " has no expert score");
    auto& mine = per_evaluator[t.evaluator_id];
    auto it = finals.find(t.key());
    if (it == finals.end()) continue;
    ++p.n_scored;
    mine.emplace_back(t.idea_id, "expert", *expert);
    mine.emplace_back(t.idea_id, "judge", it->second);
    pooled.emplace_back(t.key(), "expert", *expert);
    pooled.emplace_back(t.key(), "judge", it->second);
  }
  p.n_evaluators = per_evaluator.size();
  p.n_pooled_units = pooled.size() / 2;

  std::vector<double> alphas;
  for (const auto& [_, triples] : per_evaluator) {
    if (auto a = try_alpha(triples, p.dimension, metric)) alphas.push_back(*a);
  }
  p.n_evaluators_defined = alphas.size();
  p.alpha_per_evaluator = mean_of(alphas);
  p.alpha_pooled = try_alpha(pooled, p.dimension, metric);
  return p;
}

AlignmentPoint alignment_point(const Corpus& corpus, const RunArtifact& artifact,
                               DistanceMetric metric) {
  std::vector<TargetInstance> targets;
  targets.reserve(artifact.outcomes.size());
  for (const auto& o : artifact.outcomes) targets.push_back(o.target);
  auto p = alignment_from_scores(corpus, targets, artifact.final_scores(), metric);
  p.dimension = artifact.spec.dimension;
  p.domain = artifact.spec.domain;
  p.condition = artifact.spec.condition;
  p.shots = artifact.spec.shots;
  p.n_skipped = artifact.count(OutcomeStatus::skipped);
  p.n_no_surviving = artifact.count(OutcomeStatus::no_surviving_prediction);
  p.n_failures = artifact.failures.size();
  return p;
}

AlignmentPoint expert_self_check(const Corpus& corpus, Dimension dimension, Domain domain,
                                 DistanceMetric metric) {
  auto targets = enumerate_targets(corpus, dimension, domain);
  std::map<std::string, int> finals;
  for (const auto& t : targets) finals[t.key()] = *corpus.score(t.evaluator_id, t.idea_id, dimension);
  auto p = alignment_from_scores(corpus, targets, finals, metric);
  p.dimension = dimension;
  p.domain = domain;
  return p;
}

std::vector<AlignmentPoint> alignment_points(const Corpus& corpus,
                                             std::span<const RunArtifact> artifacts,
                                             DistanceMetric metric) {
  std::vector<AlignmentPoint> points;
  for (const auto& a : artifacts) points.push_back(alignment_point(corpus, a, metric));
  std::sort(points.begin(), points.end(), [](const AlignmentPoint& x, const AlignmentPoint& y) {
    return std::tie(x.dimension, x.domain, x.condition, x.shots) <
           std::tie(y.dimension, y.domain, y.condition, y.shots);
  });
  return points;
}

Table alignment_table(std::span<const AlignmentPoint> points) {
  Table t;
  t.name = "alignment";
  t.columns = {"dimension",        "domain",          "condition",
               "shots",            "alpha_primary",   "primary_variant",
               "alpha_per_evaluator", "evaluators_defined", "evaluators",
               "alpha_pooled",     "pooled_units",    "targets",
               "scored",           "skipped",         "no_surviving",
               "failures",         "status"};
  t.metadata["primary_variant"] =
      "per_evaluator_mean for personalized runs, pooled for aggregate and zero_shot";
  for (const auto& p : points) {
    t.add_row({name_cell(to_string(p.dimension)), name_cell(to_string(p.domain)),
               name_cell(to_string(p.condition)), count_cell(p.shots),
               optional_cell(p.primary_alpha()), name_cell(p.primary_variant()),
               optional_cell(p.alpha_per_evaluator), count_cell(p.n_evaluators_defined),
               count_cell(p.n_evaluators), optional_cell(p.alpha_pooled),
               count_cell(p.n_pooled_units), count_cell(p.n_targets), count_cell(p.n_scored),
               count_cell(p.n_skipped), count_cell(p.n_no_surviving), count_cell(p.n_failures),
               std::string(p.empty() ? "empty" : "ok")});
  }
  return t;
}

std::vector<Table> alignment_curves(std::span<const AlignmentPoint> points) {
  std::vector<Table> tables;
  for (Dimension dim : kAllDimensions) {
    // (domain, shots) -> condition -> alpha
    std::map<std::pair<Domain, std::size_t>, std::map<Condition, std::optional<double>>> grid;
    std::map<Domain, std::optional<double>> zero;
    bool any = false;
    for (const auto& p : points) {
      if (p.dimension != dim) continue;
      any = true;
      if (p.condition == Condition::zero_shot) {
        zero[p.domain] = p.primary_alpha();
      } else {
        grid[{p.domain, p.shots}][p.condition] = p.primary_alpha();
      }
    }
    if (!any) continue;
    Table t;
    t.name = "alignment_curve_" + std::string(to_string(dim));
    t.columns = {"domain", "shots", "zero_shot", "aggregate", "personalized"};
    t.metadata["value"] = "alpha_primary";
    if (grid.empty()) {
      for (const auto& [dom, a] : zero) {
        t.add_row({name_cell(to_string(dom)), count_cell(0), optional_cell(a), Cell{}, Cell{}});
      }
    }
    for (const auto& [key, by_cond] : grid) {
      auto cell_for = [&](Condition c) -> Cell {
        auto it = by_cond.find(c);
        return it == by_cond.end() ? Cell{} : optional_cell(it->second);
      };
      auto z = zero.find(key.first);
      t.add_row({name_cell(to_string(key.first)), count_cell(key.second),
                 z == zero.end() ? Cell{} : optional_cell(z->second),
                 cell_for(Condition::aggregate), cell_for(Condition::personalized)});
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

std::vector<RunArtifact> run_study(const Corpus& corpus, const StudyConfig& config,
                                   JudgeBackend& backend) {
  config.validate();
  std::vector<RunArtifact> out;
  for (const auto& spec : config.run_specs(corpus)) {
    out.push_back(run_condition(corpus, spec, backend));
  }
  return out;
}

std::vector<AlignmentPoint> alignment_study(const StudyConfig& config) {
  config.validate();
  auto corpus = load_corpus(CorpusPaths::in_directory(config.corpus_dir));
  auto backend = make_backend(config.backend);
  auto artifacts = run_study(corpus, config, *backend);
  return alignment_points(corpus, artifacts, config.metric);
}

Table discard_rate_table(std::span<const RunArtifact> artifacts) {
  std::map<std::pair<Dimension, Domain>, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& a : artifacts) {
    auto& c = counts[{a.spec.dimension, a.spec.domain}];
    for (const auto& p : a.predictions) {
      ++c.second;
      if (p.discarded) ++c.first;
    }
  }
  Table t;
  t.name = "discard_rates";
  t.columns = {"dimension", "domain", "predictions", "discarded", "discard_rate"};
  for (const auto& [key, c] : counts) {
    Cell rate = c.second == 0 ? Cell{}
                              : Cell{static_cast<double>(c.first) / static_cast<double>(c.second)};
    t.add_row({name_cell(to_string(key.first)), name_cell(to_string(key.second)),
               count_cell(c.second), count_cell(c.first), rate});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Coarse judge metrics

std::vector<const RunArtifact*> select_artifacts(std::span<const RunArtifact> artifacts,
                                                 Dimension dimension, Condition condition,
                                                 std::optional<std::size_t> shots) {
  std::vector<const RunArtifact*> matching;
  for (const auto& a : artifacts) {
    if (a.spec.dimension == dimension && a.spec.condition == condition) matching.push_back(&a);
  }
  if (matching.empty()) return {};
  std::size_t want = 0;
  if (condition != Condition::zero_shot) {
    if (shots) {
      want = *shots;
    } else {
      for (const auto* a : matching) want = std::max(want, a->spec.shots);
    }
  }
  std::vector<const RunArtifact*> out;
  for (const auto* a : matching) {
    if (a->spec.shots == want) out.push_back(a);
  }
  if (out.empty()) {
    throw Error("no run artifacts for " + std::string(to_string(dimension)) + " / " +
                std::string(to_string(condition)) + " at " + std::to_string(want) +
                " shots; run run-judge with --shots " + std::to_string(want) + " first");
  }
  return out;
}

std::vector<CoarseRow> coarse_judge_report(const Corpus& corpus,
                                           std::span<const RunArtifact> artifacts,
                                           std::optional<std::size_t> shots, MedianRule rule) {
  if (artifacts.empty()) throw Error("no run artifacts given; run run-judge first");
  std::vector<CoarseRow> rows;
  for (Dimension dim : kAllDimensions) {
    for (Condition cond : kAllConditions) {
      auto chosen = select_artifacts(artifacts, dim, cond, shots);
      if (chosen.empty()) continue;
      CoarseRow row;
      row.dimension = dim;
      row.condition = cond;
      row.shots = chosen.front()->spec.shots;

      std::map<std::string, std::pair<std::map<std::string, int>, std::map<std::string, int>>>
          per_evaluator;  // evaluator -> (expert, judge) over shared items
      for (const auto* a : chosen) {
        auto finals = a->final_scores();
        for (const auto& o : a->outcomes) {
          auto& entry = per_evaluator[o.target.evaluator_id];
          auto it = finals.find(o.target.key());
          if (it == finals.end()) continue;
          entry.first[o.target.idea_id] =
              *corpus.score(o.target.evaluator_id, o.target.idea_id, dim);
          entry.second[o.target.idea_id] = it->second;
        }
      }
      row.n_evaluators = per_evaluator.size();
      std::vector<double> jac;
      std::vector<double> top;
      for (const auto& [_, maps] : per_evaluator) {
        const auto& [expert, judge] = maps;
        if (expert.empty()) continue;
        jac.push_back(jaccard(above_median_set(expert, rule), above_median_set(judge, rule)));
        if (expert.size() >= 2) top.push_back(top_half_overlap(expert, judge));
      }
      row.jaccard = mean_of(jac);
      row.n_jaccard = jac.size();
      row.top_half = mean_of(top);
      row.n_top_half = top.size();
      rows.push_back(row);
    }
  }
  return rows;
}

Table coarse_table(std::span<const CoarseRow> rows) {
  Table t;
  t.name = "coarse";
  t.columns = {"dimension", "condition", "shots", "evaluators", "jaccard",
               "jaccard_evaluators", "top_half_overlap", "top_half_evaluators"};
  for (const auto& r : rows) {
    t.add_row({name_cell(to_string(r.dimension)), name_cell(to_string(r.condition)),
               count_cell(r.shots), count_cell(r.n_evaluators), optional_cell(r.jaccard),
               count_cell(r.n_jaccard), optional_cell(r.top_half), count_cell(r.n_top_half)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Reasoning similarity

ReasoningResult reasoning_similarity_study(const Corpus& corpus,
                                           std::span<const RunArtifact* const> artifacts,
                                           EmbeddingBackend& embedding, DistanceMetric metric,
                                           std::size_t min_shared) {
  if (artifacts.empty()) throw Error("no run artifacts given for the reasoning study");
  ReasoningResult result;
  result.condition = artifacts.front()->spec.condition;
  result.shots = artifacts.front()->spec.shots;

  // (evaluator) -> (idea, dimension) -> kept reason texts
  using Instance = std::pair<std::string, Dimension>;
  std::map<std::string, std::map<Instance, std::vector<const std::string*>>> reasons;
  for (const auto* a : artifacts) {
    if (a->spec.condition != result.condition || a->spec.shots != result.shots) {
      throw Error("reasoning study artifacts must share one condition and shot count");
    }
    for (const auto& p : a->predictions) {
      if (p.discarded) continue;
      reasons[p.evaluator_id][{p.idea_id, p.dimension}].push_back(&p.reason);
    }
  }

  std::unordered_map<std::string, std::vector<double>> vectors;
  auto vector_of = [&](const std::string& text) -> const std::vector<double>& {
    auto it = vectors.find(text);
    if (it == vectors.end()) it = vectors.emplace(text, embedding.embed(text)).first;
    return it->second;
  };
  auto mean_embedding = [&](const std::map<Instance, std::vector<const std::string*>>& mine,
                            const std::vector<Instance>& shared) {
    std::vector<double> acc;
    std::size_t n = 0;
    for (const auto& inst : shared) {
      for (const auto* text : mine.at(inst)) {
        const auto& v = vector_of(*text);
        if (acc.empty()) acc.assign(v.size(), 0.0);
        if (v.size() != acc.size()) throw Error("embedding dimension changed mid-study");
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
        ++n;
      }
    }
    for (double& x : acc) x /= static_cast<double>(n);
    return acc;
  };

  for (auto a = reasons.begin(); a != reasons.end(); ++a) {
    for (auto b = std::next(a); b != reasons.end(); ++b) {
      std::vector<Instance> shared;
      for (const auto& [inst, _] : a->second) {
        if (b->second.count(inst)) shared.push_back(inst);
      }
      if (shared.size() < min_shared) continue;

      // x and y are both taken per dimension and averaged over the same
      // dimensions, so the rubric wording of a dimension cannot stand in for
      // agreement.
      std::map<Dimension, Triples> by_dim;
      std::map<Dimension, std::vector<Instance>> shared_by_dim;
      for (const auto& inst : shared) {
        const auto& [idea, dim] = inst;
        auto sa = corpus.score(a->first, idea, dim);
        auto sb = corpus.score(b->first, idea, dim);
        if (!sa || !sb) continue;
        by_dim[dim].emplace_back(idea, a->first, *sa);
        by_dim[dim].emplace_back(idea, b->first, *sb);
        shared_by_dim[dim].push_back(inst);
      }
      std::vector<double> alphas;
      std::vector<double> cosines;
      for (const auto& [dim, triples] : by_dim) {
        auto al = try_alpha(triples, dim, metric);
        if (!al) continue;
        try {
          cosines.push_back(cosine_similarity(mean_embedding(a->second, shared_by_dim[dim]),
                                              mean_embedding(b->second, shared_by_dim[dim])));
        } catch (const DegenerateInputError&) {
          continue;
        }
        alphas.push_back(*al);
      }
      auto alpha = mean_of(alphas);
      auto cosine = mean_of(cosines);
      if (!alpha || !cosine) continue;
      result.points.push_back({a->first, b->first, shared.size(), *alpha, *cosine});
    }
  }

  if (result.points.size() < 2) {
    throw InsufficientDataError("reasoning study for " + std::string(to_string(result.condition)) +
                                " needs at least two evaluator pairs with shared instances, found " +
                                std::to_string(result.points.size()));
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : result.points) {
    xs.push_back(p.alpha);
    ys.push_back(p.cosine);
  }
  try {
    result.pearson = pearson_r(xs, ys);
  } catch (const DegenerateInputError& e) {
    result.error = std::string("no correlation: ") + e.what();
  }
  return result;
}

std::vector<ReasoningResult> reasoning_by_condition(const Corpus& corpus,
                                                    std::span<const RunArtifact> artifacts,
                                                    EmbeddingBackend& embedding,
                                                    std::optional<std::size_t> shots,
                                                    DistanceMetric metric) {
  if (artifacts.empty()) throw Error("no run artifacts given; run run-judge first");
  std::vector<ReasoningResult> out;
  for (Condition cond : kAllConditions) {
    std::vector<const RunArtifact*> chosen;
    for (Dimension dim : kAllDimensions) {
      auto part = select_artifacts(artifacts, dim, cond, shots);
      chosen.insert(chosen.end(), part.begin(), part.end());
    }
    if (chosen.empty()) continue;
    try {
      out.push_back(reasoning_similarity_study(corpus, chosen, embedding, metric));
    } catch (const Error& e) {
      ReasoningResult r;
      r.condition = cond;
      r.shots = cond == Condition::zero_shot ? 0 : chosen.front()->spec.shots;
      r.error = e.what();
      spdlog::warn("reasoning study, {}: {}", to_string(cond), e.what());
      out.push_back(std::move(r));
    }
  }
  return out;
}

Table reasoning_points_table(std::span<const ReasoningResult> results) {
  Table t;
  t.name = "reasoning_points";
  t.columns = {"condition", "shots", "evaluator_a", "evaluator_b", "shared_instances", "alpha",
               "cosine"};
  for (const auto& r : results) {
    for (const auto& p : r.points) {
      t.add_row({name_cell(to_string(r.condition)), count_cell(r.shots), p.evaluator_a,
                 p.evaluator_b, count_cell(p.shared_instances), p.alpha, p.cosine});
    }
  }
  return t;
}

Table reasoning_summary_table(std::span<const ReasoningResult> results,
                              const EmbeddingBackend& embedding) {
  Table t;
  t.name = "reasoning_summary";
  t.columns = {"condition", "shots", "pairs", "pearson_r", "status"};
  t.metadata["reason_aggregation"] = "mean_of_embeddings";
  t.metadata["embedding"] = embedding.id();
  for (const auto& r : results) {
    t.add_row({name_cell(to_string(r.condition)), count_cell(r.shots), count_cell(r.points.size()),
               optional_cell(r.pearson), r.error.empty() ? std::string("ok") : r.error});
  }
  return t;
}

}  // namespace ideajudge
