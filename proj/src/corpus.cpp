#include "ideajudge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "ideajudge/errors.hpp"

namespace ideajudge {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::nlp:
      return "NLP";
    case Domain::cs:
      return "CS";
    case Domain::matchem:
      return "MatChem";
  }
  return "?";
}

std::string_view to_string(Background b) {
  return b == Background::technical ? "technical" : "business";
}

std::optional<Domain> try_parse_domain(std::string_view s) {
  for (Domain d : kAllDomains) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

Domain parse_domain(std::string_view s) {
  if (auto d = try_parse_domain(s)) return *d;
  throw ParseError("unknown domain '" + std::string(s) + "' (expected NLP, CS or MatChem)");
}

Background parse_background(std::string_view s) {
  if (s == "technical") return Background::technical;
  if (s == "business") return Background::business;
  throw ParseError("unknown background '" + std::string(s) +
                   "' (expected technical or business)");
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

template <typename T, typename KeyFn>
std::map<std::string, std::size_t, std::less<>> build_unique_index(std::vector<T>& items,
                                                                   KeyFn key,
                                                                   std::string_view what) {
  std::sort(items.begin(), items.end(),
            [&](const T& a, const T& b) { return key(a) < key(b); });
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!index.emplace(key(items[i]), i).second) {
      throw DuplicateKeyError("duplicate " + std::string(what) + " '" + key(items[i]) + "'");
    }
  }
  return index;
}

const std::vector<std::size_t>& empty_indices() {
  static const std::vector<std::size_t> empty;
  return empty;
}

std::string score_label(const ScoreRecord& r) {
  return "(" + r.evaluator_id + ", " + r.idea_id + ", " + std::string(to_string(r.dimension)) +
         ")";
}

}  // namespace

Corpus Corpus::build(std::vector<Patent> patents, std::vector<Idea> ideas,
                     std::vector<Evaluator> evaluators, std::vector<ScoreRecord> scores) {
  Corpus c;
  c.patents_ = std::move(patents);
  c.ideas_ = std::move(ideas);
  c.evaluators_ = std::move(evaluators);
  c.scores_ = std::move(scores);

  c.patent_index_ = build_unique_index(
      c.patents_, [](const Patent& p) { return p.patent_id; }, "patent_id");
  c.idea_index_ =
      build_unique_index(c.ideas_, [](const Idea& i) { return i.idea_id; }, "idea_id");
  c.evaluator_index_ = build_unique_index(
      c.evaluators_, [](const Evaluator& e) { return e.evaluator_id; }, "evaluator_id");

  for (std::size_t i = 0; i < c.ideas_.size(); ++i) {
    const Idea& idea = c.ideas_[i];
    if (!c.patent_index_.contains(idea.patent_id)) {
      throw ForeignKeyError("idea '" + idea.idea_id + "' references unknown patent_id '" +
                            idea.patent_id + "'");
    }
    for (const auto* field :
         {&idea.title, &idea.description, &idea.implementation, &idea.differentiation}) {
      if (field->empty()) throw Error("idea '" + idea.idea_id + "' has an empty content field");
    }
    c.by_patent_[idea.patent_id].push_back(i);
  }

  std::sort(c.scores_.begin(), c.scores_.end(),
            [](const ScoreRecord& a, const ScoreRecord& b) { return a.key() < b.key(); });
  for (std::size_t i = 0; i < c.scores_.size(); ++i) {
    const ScoreRecord& r = c.scores_[i];
    if (!c.evaluator_index_.contains(r.evaluator_id)) {
      throw ForeignKeyError("score " + score_label(r) + " references unknown evaluator_id");
    }
    if (!c.idea_index_.contains(r.idea_id)) {
      throw ForeignKeyError("score " + score_label(r) + " references unknown idea_id");
    }
    const auto& spec = dimension_spec(r.dimension);
    if (!spec.in_scale(r.score)) {
      throw RangeError("score " + score_label(r) + " = " + std::to_string(r.score) +
                       " is outside [" + std::to_string(spec.scale_min) + ", " +
                       std::to_string(spec.scale_max) + "]");
    }
    if (!c.score_index_.emplace(r.key(), i).second) {
      throw DuplicateKeyError("duplicate score " + score_label(r));
    }
    c.by_evaluator_dim_[{r.evaluator_id, r.dimension}].push_back(i);
    c.by_idea_dim_[{r.idea_id, r.dimension}].push_back(i);
  }
  return c;
}

const Patent* Corpus::find_patent(std::string_view id) const {
  auto it = patent_index_.find(id);
  return it == patent_index_.end() ? nullptr : &patents_[it->second];
}

const Idea* Corpus::find_idea(std::string_view id) const {
  auto it = idea_index_.find(id);
  return it == idea_index_.end() ? nullptr : &ideas_[it->second];
}

const Evaluator* Corpus::find_evaluator(std::string_view id) const {
  auto it = evaluator_index_.find(id);
  return it == evaluator_index_.end() ? nullptr : &evaluators_[it->second];
}

const Patent& Corpus::patent(std::string_view id) const {
  if (const auto* p = find_patent(id)) return *p;
  throw std::out_of_range("unknown patent_id '" + std::string(id) + "'");
}

const Idea& Corpus::idea(std::string_view id) const {
  if (const auto* i = find_idea(id)) return *i;
  throw std::out_of_range("unknown idea_id '" + std::string(id) + "'");
}

const Evaluator& Corpus::evaluator(std::string_view id) const {
  if (const auto* e = find_evaluator(id)) return *e;
  throw std::out_of_range("unknown evaluator_id '" + std::string(id) + "'");
}

const Patent& Corpus::patent_of(std::string_view idea_id) const {
  return patent(idea(idea_id).patent_id);
}

Domain Corpus::idea_domain(std::string_view idea_id) const { return patent_of(idea_id).domain; }

std::optional<int> Corpus::score(std::string_view evaluator_id, std::string_view idea_id,
                                 Dimension dim) const {
  auto it = score_index_.find(ScoreKey{std::string(evaluator_id), std::string(idea_id), dim});
  if (it == score_index_.end()) return std::nullopt;
  return scores_[it->second].score;
}

const std::vector<std::size_t>& Corpus::scores_by_evaluator(std::string_view evaluator_id,
                                                            Dimension dim) const {
  auto it = by_evaluator_dim_.find({std::string(evaluator_id), dim});
  return it == by_evaluator_dim_.end() ? empty_indices() : it->second;
}

const std::vector<std::size_t>& Corpus::scores_by_idea(std::string_view idea_id,
                                                       Dimension dim) const {
  auto it = by_idea_dim_.find({std::string(idea_id), dim});
  return it == by_idea_dim_.end() ? empty_indices() : it->second;
}

const std::vector<std::size_t>& Corpus::ideas_by_patent(std::string_view patent_id) const {
  auto it = by_patent_.find(patent_id);
  return it == by_patent_.end() ? empty_indices() : it->second;
}

namespace {

bool same_patent(const Patent& a, const Patent& b) {
  return a.patent_id == b.patent_id && a.domain == b.domain && a.title == b.title &&
         a.abstract == b.abstract && a.claims == b.claims && a.description == b.description;
}

bool same_idea(const Idea& a, const Idea& b) {
  return a.idea_id == b.idea_id && a.patent_id == b.patent_id && a.system_id == b.system_id &&
         a.title == b.title && a.description == b.description &&
         a.implementation == b.implementation && a.differentiation == b.differentiation;
}

bool same_evaluator(const Evaluator& a, const Evaluator& b) {
  return a.evaluator_id == b.evaluator_id && a.domain == b.domain &&
         a.background == b.background;
}

}  // namespace

bool Corpus::operator==(const Corpus& other) const {
  return std::equal(patents_.begin(), patents_.end(), other.patents_.begin(),
                    other.patents_.end(), same_patent) &&
         std::equal(ideas_.begin(), ideas_.end(), other.ideas_.begin(), other.ideas_.end(),
                    same_idea) &&
         std::equal(evaluators_.begin(), evaluators_.end(), other.evaluators_.begin(),
                    other.evaluators_.end(), same_evaluator) &&
         scores_ == other.scores_;
}

// ---------------------------------------------------------------------------
// Line-delimited JSON I/O

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "patents.jsonl", dir / "ideas.jsonl", dir / "evaluators.jsonl",
          dir / "scores.jsonl"};
}

namespace {

struct LineContext {
  std::string file;
  std::size_t line = 0;

  std::string where() const { return file + ":" + std::to_string(line); }
};

std::string get_string(const nlohmann::json& obj, const char* key, const LineContext& ctx,
                       bool allow_empty = true) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(ctx.where() + ": field \"" + key + "\" must be a string", ctx.line);
  }
  auto value = it->get<std::string>();
  if (!allow_empty && value.empty()) {
    throw ParseError(ctx.where() + ": field \"" + key + "\" must not be empty", ctx.line);
  }
  return value;
}

template <typename Fn>
auto parse_enum(Fn fn, const std::string& text, const LineContext& ctx) {
  try {
    return fn(text);
  } catch (const ParseError& e) {
    throw ParseError(ctx.where() + ": " + e.what(), ctx.line);
  }
}

// Calls `handle(json, ctx)` for each non-blank line of `path`.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(const nlohmann::json&, const LineContext&)>& handle) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  LineContext ctx{path.filename().string(), 0};
  std::string line;
  while (std::getline(in, line)) {
    ++ctx.line;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ctx.where() + ": invalid JSON (" + e.what() + ")", ctx.line);
    }
    if (!obj.is_object()) throw ParseError(ctx.where() + ": expected a JSON object", ctx.line);
    handle(obj, ctx);
  }
}

}  // namespace

Corpus load_corpus(const CorpusPaths& paths) {
  std::vector<Patent> patents;
  std::vector<Idea> ideas;
  std::vector<Evaluator> evaluators;
  std::vector<ScoreRecord> scores;
  std::set<std::string, std::less<>> patent_ids, idea_ids, evaluator_ids;
  std::set<ScoreKey> score_keys;

  for_each_line(paths.patents, [&](const nlohmann::json& obj, const LineContext& ctx) {
    Patent p;
    p.patent_id = get_string(obj, "patent_id", ctx, false);
    p.domain = parse_enum(parse_domain, get_string(obj, "domain", ctx), ctx);
    p.title = get_string(obj, "title", ctx);
    p.abstract = get_string(obj, "abstract", ctx);
    auto claims = obj.find("claims");
    if (claims == obj.end() || !claims->is_array()) {
      throw ParseError(ctx.where() + ": field \"claims\" must be an array", ctx.line);
    }
    for (const auto& c : *claims) {
      if (!c.is_string()) throw ParseError(ctx.where() + ": claims must be strings", ctx.line);
      p.claims.push_back(c.get<std::string>());
    }
    p.description = obj.contains("description") ? get_string(obj, "description", ctx) : "";
    if (!patent_ids.insert(p.patent_id).second) {
      throw DuplicateKeyError(ctx.where() + ": duplicate patent_id '" + p.patent_id + "'");
    }
    patents.push_back(std::move(p));
  });

  for_each_line(paths.ideas, [&](const nlohmann::json& obj, const LineContext& ctx) {
    Idea i;
    i.idea_id = get_string(obj, "idea_id", ctx, false);
    i.patent_id = get_string(obj, "patent_id", ctx, false);
    i.system_id = get_string(obj, "system_id", ctx);
    i.title = get_string(obj, "title", ctx, false);
    i.description = get_string(obj, "description", ctx, false);
    i.implementation = get_string(obj, "implementation", ctx, false);
    i.differentiation = get_string(obj, "differentiation", ctx, false);
    if (!patent_ids.contains(i.patent_id)) {
      throw ForeignKeyError(ctx.where() + ": idea '" + i.idea_id +
                            "' references unknown patent_id '" + i.patent_id + "'");
    }
    if (!idea_ids.insert(i.idea_id).second) {
      throw DuplicateKeyError(ctx.where() + ": duplicate idea_id '" + i.idea_id + "'");
    }
    ideas.push_back(std::move(i));
  });

  for_each_line(paths.evaluators, [&](const nlohmann::json& obj, const LineContext& ctx) {
    Evaluator e;
    e.evaluator_id = get_string(obj, "evaluator_id", ctx, false);
    e.domain = parse_enum(parse_domain, get_string(obj, "domain", ctx), ctx);
    e.background = parse_enum(parse_background, get_string(obj, "background", ctx), ctx);
    if (!evaluator_ids.insert(e.evaluator_id).second) {
      throw DuplicateKeyError(ctx.where() + ": duplicate evaluator_id '" + e.evaluator_id + "'");
    }
    evaluators.push_back(std::move(e));
  });

  for_each_line(paths.scores, [&](const nlohmann::json& obj, const LineContext& ctx) {
    ScoreRecord r;
    r.evaluator_id = get_string(obj, "evaluator_id", ctx, false);
    r.idea_id = get_string(obj, "idea_id", ctx, false);
    r.dimension = parse_enum(parse_dimension, get_string(obj, "dimension", ctx), ctx);
    auto score = obj.find("score");
    if (score == obj.end() || !score->is_number_integer()) {
      throw ParseError(ctx.where() + ": field \"score\" must be an integer", ctx.line);
    }
    r.score = score->get<int>();
    if (auto reason = obj.find("reason"); reason != obj.end() && !reason->is_null()) {
      r.reason = get_string(obj, "reason", ctx);
    }
    const auto& spec = dimension_spec(r.dimension);
    if (!spec.in_scale(r.score)) {
      throw RangeError(ctx.where() + ": score " + score_label(r) + " = " +
                       std::to_string(r.score) + " is outside [" +
                       std::to_string(spec.scale_min) + ", " + std::to_string(spec.scale_max) +
                       "]");
    }
    if (!evaluator_ids.contains(r.evaluator_id)) {
      throw ForeignKeyError(ctx.where() + ": score " + score_label(r) +
                            " references unknown evaluator_id");
    }
    if (!idea_ids.contains(r.idea_id)) {
      throw ForeignKeyError(ctx.where() + ": score " + score_label(r) +
                            " references unknown idea_id");
    }
    if (!score_keys.insert(r.key()).second) {
      throw DuplicateKeyError(ctx.where() + ": duplicate score " + score_label(r));
    }
    scores.push_back(std::move(r));
  });

  return Corpus::build(std::move(patents), std::move(ideas), std::move(evaluators),
                       std::move(scores));
}

namespace {

template <typename T, typename Fn>
void write_lines(const std::filesystem::path& path, const std::vector<T>& items, Fn to_json) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& item : items) out << to_json(item).dump() << '\n';
}

}  // namespace

void save_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  write_lines(paths.patents, corpus.patents(), [](const Patent& p) {
    return ordered_json{{"patent_id", p.patent_id},
                        {"domain", to_string(p.domain)},
                        {"title", p.title},
                        {"abstract", p.abstract},
                        {"claims", p.claims},
                        {"description", p.description}};
  });
  write_lines(paths.ideas, corpus.ideas(), [](const Idea& i) {
    return ordered_json{{"idea_id", i.idea_id},
                        {"patent_id", i.patent_id},
                        {"system_id", i.system_id},
                        {"title", i.title},
                        {"description", i.description},
                        {"implementation", i.implementation},
                        {"differentiation", i.differentiation}};
  });
  write_lines(paths.evaluators, corpus.evaluators(), [](const Evaluator& e) {
    return ordered_json{{"evaluator_id", e.evaluator_id},
                        {"domain", to_string(e.domain)},
                        {"background", to_string(e.background)}};
  });
  write_lines(paths.scores, corpus.scores(), [](const ScoreRecord& r) {
    ordered_json j{{"evaluator_id", r.evaluator_id},
                   {"idea_id", r.idea_id},
                   {"dimension", to_string(r.dimension)},
                   {"score", r.score}};
    if (r.reason) j["reason"] = *r.reason;
    return j;
  });
}

// ---------------------------------------------------------------------------
// Screening and descriptive statistics

std::string Violation::describe() const {
  std::string out = "evaluator " + evaluator_id + ", idea " + idea_id + ": scored ";
  for (std::size_t i = 0; i < offending.size(); ++i) {
    if (i) out += ", ";
    out += to_string(offending[i]);
  }
  out += " although gate ";
  for (std::size_t i = 0; i < failed_gates.size(); ++i) {
    if (i) out += ", ";
    out += to_string(failed_gates[i]);
  }
  out += " failed or is missing";
  return out;
}

std::vector<Violation> validate_screening(const Corpus& corpus) {
  // Scores are sorted by (evaluator, idea, dimension), so each pair is a run.
  std::vector<Violation> out;
  const auto& scores = corpus.scores();
  std::size_t begin = 0;
  while (begin < scores.size()) {
    std::size_t end = begin;
    std::map<Dimension, int> pair_scores;
    while (end < scores.size() && scores[end].evaluator_id == scores[begin].evaluator_id &&
           scores[end].idea_id == scores[begin].idea_id) {
      pair_scores[scores[end].dimension] = scores[end].score;
      ++end;
    }

    auto gate_passes = [&](Dimension gate) {
      auto it = pair_scores.find(gate);
      return it != pair_scores.end() && it->second > *dimension_spec(gate).gate_threshold;
    };

    std::set<Dimension> failed;
    std::vector<Dimension> offending;
    for (const auto& [dim, score] : pair_scores) {
      bool bad = false;
      for (Dimension gate : upstream_gates(dim)) {
        if (!gate_passes(gate)) {
          failed.insert(gate);
          bad = true;
        }
      }
      if (bad) offending.push_back(dim);
    }
    if (!offending.empty()) {
      out.push_back({scores[begin].evaluator_id, scores[begin].idea_id,
                     {failed.begin(), failed.end()}, std::move(offending)});
    }
    begin = end;
  }
  return out;
}

std::vector<DomainMismatch> domain_mismatches(const Corpus& corpus) {
  std::vector<DomainMismatch> out;
  const ScoreRecord* prev = nullptr;
  for (const auto& r : corpus.scores()) {
    if (prev && prev->evaluator_id == r.evaluator_id && prev->idea_id == r.idea_id) continue;
    prev = &r;
    Domain ed = corpus.evaluator(r.evaluator_id).domain;
    Domain id = corpus.idea_domain(r.idea_id);
    if (ed != id) out.push_back({r.evaluator_id, r.idea_id, ed, id});
  }
  return out;
}

std::map<std::string, double> evaluator_means(const Corpus& corpus, Dimension dim) {
  std::map<std::string, double> out;
  for (const auto& e : corpus.evaluators()) {
    const auto& idx = corpus.scores_by_evaluator(e.evaluator_id, dim);
    if (idx.empty()) continue;
    double sum = 0.0;
    for (std::size_t i : idx) sum += corpus.scores()[i].score;
    out[e.evaluator_id] = sum / static_cast<double>(idx.size());
  }
  return out;
}

std::vector<CoverageRow> coverage_stats(const Corpus& corpus) {
  std::vector<CoverageRow> rows;
  CoverageRow total{"Total"};
  for (Domain d : kAllDomains) {
    CoverageRow row{std::string(to_string(d))};
    for (const auto& e : corpus.evaluators()) row.n_evaluators += e.domain == d;
    for (const auto& p : corpus.patents()) row.n_patents += p.domain == d;
    for (const auto& i : corpus.ideas()) row.n_ideas += corpus.patent(i.patent_id).domain == d;
    for (const auto& r : corpus.scores()) row.n_annotations += corpus.idea_domain(r.idea_id) == d;
    total.n_evaluators += row.n_evaluators;
    total.n_patents += row.n_patents;
    total.n_ideas += row.n_ideas;
    total.n_annotations += row.n_annotations;
    rows.push_back(row);
  }
  rows.push_back(total);
  return rows;
}

}  // namespace ideajudge
