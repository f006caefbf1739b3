#include "ideajudge/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ideajudge/errors.hpp"
#include "ideajudge/rng.hpp"

namespace ideajudge {

namespace {

using Bank = std::array<std::array<const char*, 6>, 4>;

// Vocabulary per dimension, one row per quality band (low to high).
const std::array<Bank, 6> kBanks = {{
    // specificity
    {{{"vague", "unclear", "generic", "abstract", "undefined", "loose"},
      {"broad", "general", "partial", "sketchy", "rough", "tentative"},
      {"concrete", "defined", "structured", "outlined", "practical", "targeted"},
      {"precise", "exact", "detailed", "specific", "pinpointed", "crisp"}}},
    // technical_validity
    {{{"speculative", "unproven", "infeasible", "theoretical", "fragile", "untested"},
      {"experimental", "challenging", "demanding", "risky", "complex", "early"},
      {"workable", "buildable", "plausible", "feasible", "prototyped", "compatible"},
      {"robust", "scalable", "proven", "deployable", "mature", "reliable"}}},
    // innovativeness
    {{{"familiar", "conventional", "standard", "routine", "common", "ordinary"},
      {"incremental", "adapted", "extended", "modified", "refined", "adjusted"},
      {"fresh", "unexpected", "inventive", "creative", "original", "distinctive"},
      {"breakthrough", "pioneering", "radical", "disruptive", "visionary", "groundbreaking"}}},
    // competitive_advantage
    {{{"imitable", "replicable", "commoditized", "interchangeable", "copyable", "generic"},
      {"reliant", "anchored", "dependent", "embedded", "tied", "rooted"},
      {"defensible", "guarded", "protected", "shielded", "hardened", "exclusive"},
      {"unassailable", "proprietary", "moated", "entrenched", "dominant", "unmatched"}}},
    // need_validity
    {{{"consumer", "hobby", "personal", "leisure", "household", "casual"},
      {"marginal", "minor", "modest", "optional", "peripheral", "slight"},
      {"valuable", "profitable", "beneficial", "strategic", "useful", "important"},
      {"essential", "critical", "urgent", "vital", "indispensable", "pressing"}}},
    // market_size
    {{{"private", "individual", "domestic", "retail", "family", "amateur"},
      {"niche", "specialized", "boutique", "narrow", "select", "limited"},
      {"mainstream", "sizable", "growing", "numerous", "extensive", "wide"},
      {"universal", "ubiquitous", "global", "pervasive", "enterprise", "industrywide"}}},
}};

const std::array<std::array<const char*, 12>, 3> kDomainNouns = {{
    {"language", "parser", "translation", "dialogue", "summarization", "embedding", "tokenizer",
     "transcript", "sentiment", "retrieval", "grammar", "speech"},
    {"scheduler", "cache", "compiler", "network", "database", "cluster", "firmware", "kernel",
     "protocol", "storage", "pipeline", "sensor"},
    {"polymer", "catalyst", "alloy", "coating", "electrolyte", "membrane", "ceramic", "adhesive",
     "pigment", "resin", "composite", "solvent"},
}};

const std::array<const char*, 10> kProducts = {"platform", "assistant", "toolkit", "service",
                                               "module",   "dashboard", "device", "engine",
                                               "monitor",  "kit"};

template <std::size_t N>
const char* pick(StableRng& rng, const std::array<const char*, N>& words) {
  return words[rng.below(N)];
}

std::size_t band(double quality) {
  return std::min<std::size_t>(3, static_cast<std::size_t>(std::floor(quality * 4.0)));
}

// `count` distinct words from one quality band of a dimension.
std::vector<std::string> band_words(StableRng& rng, Dimension d, double quality,
                                    std::size_t count) {
  const auto& row = kBanks[static_cast<std::size_t>(d)][band(quality)];
  std::array<std::size_t, 6> order = {0, 1, 2, 3, 4, 5};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count && i < order.size(); ++i) {
    std::size_t j = i + rng.below(order.size() - i);
    std::swap(order[i], order[j]);
    out.emplace_back(row[order[i]]);
  }
  return out;
}

std::string join(const std::vector<std::string>& words, const char* sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::string id_with_number(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

std::uint64_t cell_seed(std::uint64_t seed, std::string_view a, std::string_view b,
                        std::string_view c) {
  std::uint64_t h = fnv1a64(std::to_string(seed));
  h = fnv1a64("|", h);
  h = fnv1a64(a, h);
  h = fnv1a64("|", h);
  h = fnv1a64(b, h);
  h = fnv1a64("|", h);
  return fnv1a64(c, h);
}

}  // namespace

int policy_score(const EvaluatorPolicy& policy, Dimension dimension, double quality,
                 std::uint64_t noise_seed) {
  const auto& spec = dimension_spec(dimension);
  double shift = 0.0;
  if (auto it = policy.threshold_shifts.find(dimension); it != policy.threshold_shifts.end()) {
    shift = it->second;
  }
  double noise = 0.0;
  if (policy.noise_scale > 0.0) {
    StableRng rng(noise_seed);
    noise = policy.noise_scale * rng.gaussian();
  }
  double raw = spec.scale_min + quality * (spec.scale_max - spec.scale_min) +
               policy.strictness_offset + shift + noise;
  return std::clamp(static_cast<int>(std::round(raw)), spec.scale_min, spec.scale_max);
}

std::vector<Patent> generate_patents(std::size_t n_patents, std::uint64_t seed, Domain domain) {
  const auto& nouns = kDomainNouns[static_cast<std::size_t>(domain)];
  std::vector<Patent> out;
  for (std::size_t i = 0; i < n_patents; ++i) {
    std::string id = id_with_number("P", i + 1, 3);
    StableRng rng(cell_seed(seed, "patent", id, ""));
    std::string a = pick(rng, nouns);
    std::string b = pick(rng, nouns);
    Patent p;
    p.patent_id = id;
    p.domain = domain;
    p.title = "Method and system for " + a + " " + b + " processing";
    p.abstract = "A method that couples a " + a + " unit with a " + b +
                 " controller to improve throughput and accuracy of " + a + " handling.";
    p.claims = {"A system comprising a " + a + " unit and a " + b + " controller.",
                "The system of claim 1, wherein the " + b + " controller adapts to load.",
                "A method of operating the system of claim 1."};
    p.description = "";
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<LatentIdea> generate_latent_ideas(std::span<const Patent> patents,
                                              std::size_t ideas_per_patent,
                                              std::uint64_t seed) {
  std::vector<LatentIdea> out;
  std::size_t counter = 0;
  for (const Patent& patent : patents) {
    const auto& nouns = kDomainNouns[static_cast<std::size_t>(patent.domain)];
    for (std::size_t k = 0; k < ideas_per_patent; ++k) {
      LatentIdea li;
      li.idea_id = id_with_number("I", ++counter, 4);
      li.patent_id = patent.patent_id;
      StableRng rng(cell_seed(seed, "idea", li.idea_id, ""));

      // A shared base keeps the dimensions correlated; the two gating
      // dimensions lean high so that screening removes a minority of pairs.
      const double base = rng.uniform();
      for (Dimension d : kAllDimensions) {
        double q = std::clamp(0.6 * base + 0.4 * rng.uniform(), 0.0, 1.0);
        if (d == Dimension::specificity || d == Dimension::technical_validity) {
          q = 0.35 + 0.65 * q;
        }
        li.quality[static_cast<std::size_t>(d)] = q;
      }

      auto words = [&](Dimension d, std::size_t n) {
        return join(band_words(rng, d, li.quality_of(d), n));
      };
      std::string noun = pick(rng, nouns);
      std::string noun2 = pick(rng, nouns);
      std::string product = pick(rng, kProducts);

      Idea& idea = li.idea;
      idea.idea_id = li.idea_id;
      idea.patent_id = patent.patent_id;
      idea.system_id = id_with_number("S", 1 + rng.below(4), 1);
      idea.title = words(Dimension::specificity, 1) + " " + noun + " " + product;
      idea.description = "A " + words(Dimension::specificity, 2) + " " + product + " for " +
                         noun2 + " work, serving " + words(Dimension::need_validity, 3) +
                         " needs across " + words(Dimension::market_size, 3) + " customers.";
      idea.implementation = "Built on the patented " + noun + " technique; the design is " +
                            words(Dimension::technical_validity, 3) + ".";
      idea.differentiation = "The approach is " + words(Dimension::innovativeness, 3) +
                             " and " + words(Dimension::competitive_advantage, 3) + ".";
      out.push_back(std::move(li));
    }
  }
  return out;
}

Corpus generate_corpus(std::size_t n_patents, std::size_t ideas_per_patent,
                       std::span<const EvaluatorPolicy> policies, std::uint64_t seed,
                       Domain domain) {
  if (n_patents == 0) throw ConfigError("n_patents must be at least 1");
  if (ideas_per_patent == 0) throw ConfigError("ideas_per_patent must be at least 1");
  if (policies.size() < 2) throw ConfigError("at least two evaluator policies are required");
  std::set<std::string> ids;
  for (const auto& p : policies) {
    if (p.evaluator_id.empty() || !ids.insert(p.evaluator_id).second) {
      throw ConfigError("evaluator ids must be unique and non-empty");
    }
    if (!(p.noise_scale >= 0.0) || !std::isfinite(p.strictness_offset)) {
      throw ConfigError("policy " + p.evaluator_id + " has degenerate parameters");
    }
  }

  auto patents = generate_patents(n_patents, seed, domain);
  auto latent = generate_latent_ideas(patents, ideas_per_patent, seed);

  std::vector<Evaluator> evaluators;
  std::vector<ScoreRecord> scores;
  for (const auto& policy : policies) {
    evaluators.push_back({policy.evaluator_id, domain, policy.background});
    for (const auto& li : latent) {
      std::array<int, 6> s{};
      for (Dimension d : kAllDimensions) {
        s[static_cast<std::size_t>(d)] =
            policy_score(policy, d, li.quality_of(d),
                         cell_seed(seed, policy.evaluator_id, li.idea_id, to_string(d)));
      }
      auto passes = [&](Dimension gate) {
        return s[static_cast<std::size_t>(gate)] > *dimension_spec(gate).gate_threshold;
      };
      for (Dimension d : kAllDimensions) {
        bool keep = true;
        for (Dimension gate : upstream_gates(d)) keep = keep && passes(gate);
        if (keep) {
          scores.push_back({policy.evaluator_id, li.idea_id, d, s[static_cast<std::size_t>(d)],
                            std::nullopt});
        }
      }
    }
  }

  std::vector<Idea> ideas;
  for (auto& li : latent) ideas.push_back(std::move(li.idea));
  return Corpus::build(std::move(patents), std::move(ideas), std::move(evaluators),
                       std::move(scores));
}

std::vector<EvaluatorPolicy> make_policies(const CohortSpec& spec, std::uint64_t seed) {
  std::vector<EvaluatorPolicy> out;
  StableRng rng(fnv1a64("policies#" + std::to_string(seed)));
  for (std::size_t i = 0; i < spec.n_evaluators; ++i) {
    EvaluatorPolicy p;
    p.evaluator_id = id_with_number("E", i + 1, 2);
    p.strictness_offset =
        spec.n_evaluators > 1
            ? -spec.offset_spread + 2.0 * spec.offset_spread * static_cast<double>(i) /
                                        static_cast<double>(spec.n_evaluators - 1)
            : 0.0;
    p.noise_scale = spec.noise_scale;
    p.background = i % 2 == 0 ? Background::technical : Background::business;
    for (Dimension d : kAllDimensions) {
      double shift = spec.shift_spread > 0.0 ? (2.0 * rng.uniform() - 1.0) * spec.shift_spread : 0.0;
      if (shift != 0.0) p.threshold_shifts[d] = shift;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ideajudge
