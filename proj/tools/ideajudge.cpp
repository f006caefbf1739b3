// Command line front end: corpus checks, judge runs and the study reports.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ideajudge/analysis.hpp"
#include "ideajudge/errors.hpp"
#include "ideajudge/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ideajudge;

namespace {

enum class Kind { text, text_list, count_list, integer, count, real, flag };

struct FlagDef {
  const char* name;  // without leading dashes; the config key swaps '-' for '_'
  Kind kind;
  const char* help;
};

// Every study flag, in the order they appear in --help.
const std::vector<FlagDef> kFlags = {
    {"corpus-dir", Kind::text, "Directory holding patents/ideas/evaluators/scores .jsonl"},
    {"out", Kind::text, "Output directory for reports (default: out)"},
    {"runs", Kind::text, "Run artifact directory (default: <out>/runs)"},
    {"dimension", Kind::text_list, "Dimensions, comma separated, or 'all'"},
    {"domain", Kind::text_list, "Domains (NLP, CS, MatChem), comma separated, or 'all'"},
    {"condition", Kind::text_list, "zero_shot, aggregate, personalized, or 'all'"},
    {"shots", Kind::count_list, "Shot counts for few-shot conditions (default 1,3,5,7,9)"},
    {"seeds", Kind::count_list, "Run seeds (default 0,1,2)"},
    {"backend", Kind::text, "Judge backend: mock_knn, replay or http_chat"},
    {"cache", Kind::text, "Response cache file (required for replay)"},
    {"replay-source", Kind::text, "Backend id whose cached responses replay serves"},
    {"mock-neighbors", Kind::count, "Neighbors used by the mock judge"},
    {"endpoint", Kind::text, "http_chat base URL, e.g. https://api.example.com"},
    {"path", Kind::text, "http_chat request path"},
    {"model", Kind::text, "http_chat model name"},
    {"api-key-env", Kind::text, "Environment variable holding the API key"},
    {"temperature", Kind::real, "Sampling temperature for http_chat"},
    {"timeout", Kind::real, "Per-request timeout in seconds"},
    {"max-retries", Kind::integer, "Retries on transport errors, 429 and 5xx"},
    {"backoff-ms", Kind::integer, "Initial retry backoff in milliseconds"},
    {"confidence-threshold", Kind::integer, "Discard predictions below this confidence (default 80)"},
    {"patent-budget", Kind::count, "Characters of abstract + claims per rendered patent"},
    {"no-example-patents", Kind::flag, "Leave patent text out of few-shot examples"},
    {"workers", Kind::count, "Concurrent judge calls per run"},
    {"metric", Kind::text, "Alpha distance metric: nominal, ordinal or interval"},
    {"min-overlap", Kind::count, "Shared items a rater pair needs for coarse Jaccard"},
    {"median-rule", Kind::text, "Above-median rule: strict or inclusive"},
    {"report-shots", Kind::count, "Shot count for coarse and reasoning reports (default: largest)"},
    {"embedding", Kind::text, "Embedding backend: deterministic_hash or http_embedding"},
    {"embedding-dim", Kind::count, "Embedding dimension"},
    {"embedding-endpoint", Kind::text, "http_embedding base URL"},
    {"embedding-model", Kind::text, "http_embedding model name"},
};

struct FlagSet {
  std::string config;
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, CLI::Option*> options;
  bool flag_values[64] = {};
};

void add_flags(CLI::App& app, FlagSet& fs, const std::vector<std::string>& names) {
  app.add_option("--config", fs.config, "JSON config file; keys mirror the flags");
  for (std::size_t i = 0; i < kFlags.size(); ++i) {
    const auto& f = kFlags[i];
    if (std::find(names.begin(), names.end(), f.name) == names.end()) continue;
    std::string flag = std::string("--") + f.name;
    CLI::Option* opt = nullptr;
    if (f.kind == Kind::flag) {
      opt = app.add_flag(flag, fs.flag_values[i], f.help);
    } else if (f.kind == Kind::text_list || f.kind == Kind::count_list) {
      opt = app.add_option(flag, fs.values[f.name], f.help)->delimiter(',');
    } else {
      opt = app.add_option(flag, fs.values[f.name], f.help)->expected(1);
    }
    fs.options[f.name] = opt;
  }
}

std::uint64_t parse_count(const std::string& flag, const std::string& s) {
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] != '-') {
      auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("--" + flag + " expects non-negative integers, got '" + s + "'");
}

nlohmann::json flag_value(const FlagDef& f, const FlagSet& fs, std::size_t index) {
  const auto& vals = fs.values.count(f.name) ? fs.values.at(f.name) : std::vector<std::string>{};
  switch (f.kind) {
    case Kind::flag:
      return fs.flag_values[index];
    case Kind::text:
      return vals.at(0);
    case Kind::text_list:
      return vals;
    case Kind::count_list: {
      auto arr = nlohmann::json::array();
      for (const auto& v : vals) arr.push_back(parse_count(f.name, v));
      return arr;
    }
    case Kind::count:
      return parse_count(f.name, vals.at(0));
    case Kind::integer:
      try {
        return std::stoi(vals.at(0));
      } catch (const std::exception&) {
        throw ConfigError(std::string("--") + f.name + " expects an integer");
      }
    case Kind::real:
      try {
        return std::stod(vals.at(0));
      } catch (const std::exception&) {
        throw ConfigError(std::string("--") + f.name + " expects a number");
      }
  }
  return nullptr;
}

// Config file first, then any flag given on the command line.
StudyConfig resolve(const FlagSet& fs) {
  nlohmann::json j = nlohmann::json::object();
  if (!fs.config.empty()) j = StudyConfig::from_file(fs.config).to_json();
  for (std::size_t i = 0; i < kFlags.size(); ++i) {
    const auto& f = kFlags[i];
    auto it = fs.options.find(f.name);
    if (it == fs.options.end() || it->second->count() == 0) continue;
    std::string key = f.name;
    std::replace(key.begin(), key.end(), '-', '_');
    j[key] = flag_value(f, fs, i);
  }
  auto config = StudyConfig::from_json(j);
  config.validate();
  return config;
}

Corpus load(const StudyConfig& config) {
  if (config.corpus_dir.empty()) throw ConfigError("--corpus-dir is required");
  return load_corpus(CorpusPaths::in_directory(config.corpus_dir));
}

void emit(const Table& t, const fs::path& dir) {
  write_table(t, dir);
  std::cout << "wrote " << (dir / (t.name + ".csv")).string() << " and .json\n";
}

std::vector<RunArtifact> load_runs(const StudyConfig& config) {
  auto dir = config.resolved_runs_dir();
  if (!fs::is_directory(dir)) {
    throw Error("run artifact directory " + dir.string() + " does not exist; run run-judge first");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no run artifacts under " + dir.string());
  std::vector<RunArtifact> runs;
  for (const auto& f : files) runs.push_back(read_run_artifact(f));
  return runs;
}

bool keep_condition(const StudyConfig& config, Condition c) {
  return std::find(config.conditions.begin(), config.conditions.end(), c) !=
         config.conditions.end();
}

bool keep_dimension(const StudyConfig& config, Dimension d) {
  return std::find(config.dimensions.begin(), config.dimensions.end(), d) !=
         config.dimensions.end();
}

std::vector<RunArtifact> filter_runs(std::vector<RunArtifact> runs, const StudyConfig& config) {
  std::erase_if(runs, [&](const RunArtifact& a) {
    return !keep_condition(config, a.spec.condition) || !keep_dimension(config, a.spec.dimension) ||
           std::find(config.domains.begin(), config.domains.end(), a.spec.domain) ==
               config.domains.end();
  });
  if (runs.empty()) throw Error("no run artifacts match the selected dimensions/domains/conditions");
  return runs;
}

// ---------------------------------------------------------------------------

int cmd_validate(const FlagSet& fs) {
  auto config = resolve(fs);
  auto corpus = load(config);
  auto violations = validate_screening(corpus);
  for (const auto& m : domain_mismatches(corpus)) {
    spdlog::warn("evaluator {} ({}) scored idea {} from {}", m.evaluator_id,
                 to_string(m.evaluator_domain), m.idea_id, to_string(m.idea_domain));
  }
  emit(violations_table(violations), config.out_dir);
  for (const auto& v : violations) std::cout << "violation: " << v.describe() << '\n';
  if (!violations.empty()) {
    std::cout << violations.size() << " screening violation(s)\n";
    return 1;
  }
  std::cout << "corpus ok: " << corpus.scores().size() << " scores\n";
  return 0;
}

int cmd_stats(const FlagSet& fs) {
  auto config = resolve(fs);
  auto corpus = load(config);
  emit(coverage_table(corpus), config.out_dir);
  emit(evaluator_means_table(corpus), config.out_dir);
  return 0;
}

int cmd_disagreement(const FlagSet& fs) {
  auto config = resolve(fs);
  auto corpus = load(config);
  emit(disagreement_report(corpus, config.metric, config.min_overlap, config.median_rule),
       config.out_dir);
  auto cells = disagreement_cells(corpus, config.metric, config.min_overlap, config.median_rule);
  emit(disagreement_detail(cells), config.out_dir);
  return 0;
}

int cmd_run_judge(const FlagSet& fs) {
  auto config = resolve(fs);
  auto corpus = load(config);
  auto backend = make_backend(config.backend);
  auto runs_dir = config.resolved_runs_dir();
  fs::create_directories(runs_dir);

  Table summary;
  summary.name = "run_summary";
  summary.columns = {"artifact", "targets", "scored", "skipped", "no_surviving",
                     "failures", "backend_calls", "discard_rate"};
  std::vector<RunArtifact> runs;
  for (const auto& spec : config.run_specs(corpus)) {
    auto artifact = run_condition(corpus, spec, *backend);
    auto name = artifact_filename(spec);
    write_run_artifact(artifact, runs_dir / name);
    summary.add_row({name, static_cast<std::int64_t>(artifact.outcomes.size()),
                     static_cast<std::int64_t>(artifact.count(OutcomeStatus::scored)),
                     static_cast<std::int64_t>(artifact.count(OutcomeStatus::skipped)),
                     static_cast<std::int64_t>(
                         artifact.count(OutcomeStatus::no_surviving_prediction)),
                     static_cast<std::int64_t>(artifact.failures.size()),
                     static_cast<std::int64_t>(artifact.backend_calls),
                     optional_cell(artifact.discard_rate())});
    runs.push_back(std::move(artifact));
  }
  if (runs.empty()) throw Error("nothing to run: the corpus has no ideas in the selected domains");
  emit(summary, config.out_dir);
  emit(discard_rate_table(runs), config.out_dir);
  return 0;
}

int cmd_align(const FlagSet& fs) {
  auto config = resolve(fs);
  auto corpus = load(config);
  auto runs = filter_runs(load_runs(config), config);
  auto points = alignment_points(corpus, runs, config.metric);
  emit(alignment_table(points), config.out_dir);
  for (const auto& t : alignment_curves(points)) emit(t, config.out_dir);
  for (const auto& p : points) {
    if (p.empty()) {
      spdlog::warn("{} / {} / {} at {} shots: no target was scored", to_string(p.dimension),
                   to_string(p.domain), to_string(p.condition), p.shots);
    }
  }
  return 0;
}

int cmd_coarse(const FlagSet& fs) {
  auto config = resolve(fs);
  auto corpus = load(config);
  auto runs = filter_runs(load_runs(config), config);
  auto rows = coarse_judge_report(corpus, runs, config.report_shots, config.median_rule);
  emit(coarse_table(rows), config.out_dir);
  return 0;
}

int cmd_reasoning(const FlagSet& fs) {
  auto config = resolve(fs);
  auto corpus = load(config);
  auto runs = filter_runs(load_runs(config), config);
  auto embedding = make_embedding(config.embedding);
  auto results = reasoning_by_condition(corpus, runs, *embedding, config.report_shots,
                                        config.metric);
  emit(reasoning_points_table(results), config.out_dir);
  emit(reasoning_summary_table(results, *embedding), config.out_dir);
  bool any_ok = std::any_of(results.begin(), results.end(),
                            [](const ReasoningResult& r) { return r.error.empty(); });
  if (!any_ok) {
    std::cerr << "error: no condition had enough qualifying evaluator pairs\n";
    return 1;
  }
  return 0;
}

struct SynthFlags {
  std::string out = "synthetic";
  std::size_t n_patents = 10;
  std::size_t ideas_per_patent = 4;
  std::size_t evaluators = 6;
  double offset_spread = 1.0;
  double noise = 0.3;
  double shift_spread = 0.0;
  std::uint64_t seed = 0;
  std::string domain = "NLP";
};

int cmd_synth(const SynthFlags& f) {
  CohortSpec spec;
  spec.n_evaluators = f.evaluators;
  spec.offset_spread = f.offset_spread;
  spec.noise_scale = f.noise;
  spec.shift_spread = f.shift_spread;
  auto policies = make_policies(spec, f.seed);
  auto corpus =
      generate_corpus(f.n_patents, f.ideas_per_patent, policies, f.seed, parse_domain(f.domain));
  fs::create_directories(f.out);
  save_corpus(corpus, CorpusPaths::in_directory(f.out));

  Table t;
  t.name = "synth_policies";
  t.columns = {"evaluator", "background", "strictness_offset", "noise_scale"};
  for (Dimension d : kAllDimensions) t.columns.push_back("shift_" + std::string(to_string(d)));
  for (const auto& p : policies) {
    std::vector<Cell> row{p.evaluator_id, std::string(to_string(p.background)),
                          p.strictness_offset, p.noise_scale};
    for (Dimension d : kAllDimensions) {
      auto it = p.threshold_shifts.find(d);
      row.push_back(it == p.threshold_shifts.end() ? 0.0 : it->second);
    }
    t.add_row(std::move(row));
  }
  emit(t, f.out);
  std::cout << "wrote corpus to " << f.out << ": " << corpus.ideas().size() << " ideas, "
            << corpus.scores().size() << " scores\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("ideajudge");
  spdlog::set_default_logger(logger);

  CLI::App app{"Expert disagreement and LLM judge alignment studies"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  const std::vector<std::string> corpus_flags = {"corpus-dir", "out"};
  std::vector<std::string> report_flags = {"corpus-dir", "out",       "runs",        "dimension",
                                           "domain",     "condition", "metric",      "median-rule",
                                           "report-shots"};
  std::vector<std::string> all_flags;
  for (const auto& f : kFlags) all_flags.emplace_back(f.name);

  struct Sub {
    const char* name;
    const char* help;
    std::vector<std::string> flags;
    int (*run)(const FlagSet&);
  };
  std::vector<Sub> subs = {
      {"validate", "Check that scores follow the staged screening protocol", corpus_flags,
       cmd_validate},
      {"stats", "Coverage counts and per-evaluator means", corpus_flags, cmd_stats},
      {"disagreement", "Expert fine-grained alpha and coarse Jaccard per dimension and domain",
       {"corpus-dir", "out", "metric", "min-overlap", "median-rule"}, cmd_disagreement},
      {"run-judge", "Run the judge for every selected dimension, domain, condition and shot count",
       all_flags, cmd_run_judge},
      {"align", "Judge-vs-expert alpha per run, plus alpha-vs-shots curves", report_flags,
       cmd_align},
      {"coarse", "Above-median Jaccard and top-half overlap of judge vs. expert", report_flags,
       cmd_coarse},
      {"reasoning", "Expert agreement vs. similarity of judge reasoning per evaluator pair",
       report_flags, cmd_reasoning},
  };
  auto& reasoning = subs.back().flags;
  for (const char* f : {"embedding", "embedding-dim", "embedding-endpoint", "embedding-model",
                        "api-key-env", "timeout", "max-retries", "backoff-ms"}) {
    reasoning.emplace_back(f);
  }

  std::vector<FlagSet> flag_sets(subs.size());
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* sub = app.add_subcommand(subs[i].name, subs[i].help);
    add_flags(*sub, flag_sets[i], subs[i].flags);
    apps.push_back(sub);
  }

  SynthFlags synth;
  auto* synth_app = app.add_subcommand("synth", "Generate a synthetic corpus with a heterogeneous cohort");
  synth_app->add_option("--out", synth.out, "Corpus output directory");
  synth_app->add_option("--n-patents", synth.n_patents, "Number of patents");
  synth_app->add_option("--ideas-per-patent", synth.ideas_per_patent, "Ideas per patent");
  synth_app->add_option("--evaluators", synth.evaluators, "Number of evaluators");
  synth_app->add_option("--offset-spread", synth.offset_spread,
                        "Strictness offsets span [-spread, +spread]");
  synth_app->add_option("--noise", synth.noise, "Gaussian noise scale");
  synth_app->add_option("--shift-spread", synth.shift_spread, "Per-dimension shift range");
  synth_app->add_option("--seed", synth.seed, "Generator seed");
  synth_app->add_option("--domain", synth.domain, "Domain of the generated patents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (synth_app->parsed()) return cmd_synth(synth);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (apps[i]->parsed()) return subs[i].run(flag_sets[i]);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
