#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ideajudge/corpus.hpp"

namespace ideajudge {

/// A synthetic evaluator's scoring standard: a monotone map from latent
/// quality to the scale, shifted by a personal offset, plus Gaussian noise.
struct EvaluatorPolicy {
  std::string evaluator_id;
  double strictness_offset = 0.0;
  double noise_scale = 0.0;
  std::map<Dimension, double> threshold_shifts;
  Background background = Background::technical;
};

struct LatentIdea {
  std::string idea_id;
  std::string patent_id;
  /// Per-dimension latent quality in [0, 1], indexed by Dimension.
  std::array<double, 6> quality{};
  Idea idea;

  double quality_of(Dimension d) const { return quality[static_cast<std::size_t>(d)]; }
};

/// Score before screening: clamp(round(min + q*(max-min) + offset + shift + noise)).
/// `noise_seed` fixes the noise draw.
int policy_score(const EvaluatorPolicy& policy, Dimension dimension, double quality,
                 std::uint64_t noise_seed);

std::vector<Patent> generate_patents(std::size_t n_patents, std::uint64_t seed, Domain domain);

/// Ideas with texts whose vocabulary tracks each dimension's quality band, so
/// lexically similar ideas have similar quality.
std::vector<LatentIdea> generate_latent_ideas(std::span<const Patent> patents,
                                              std::size_t ideas_per_patent, std::uint64_t seed);

/// Every evaluator scores every idea on every dimension, then scores that the
/// staged screening protocol would never have collected are removed.
/// Throws ConfigError for n_patents == 0, ideas_per_patent == 0, fewer than
/// two policies, duplicate evaluator ids or negative noise.
Corpus generate_corpus(std::size_t n_patents, std::size_t ideas_per_patent,
                       std::span<const EvaluatorPolicy> policies, std::uint64_t seed,
                       Domain domain = Domain::nlp);

struct CohortSpec {
  std::size_t n_evaluators = 6;
  /// Offsets are spaced evenly over [-offset_spread, +offset_spread].
  double offset_spread = 1.0;
  double noise_scale = 0.3;
  /// Per-dimension shifts are drawn uniformly from [-shift_spread, +shift_spread].
  double shift_spread = 0.0;
};

std::vector<EvaluatorPolicy> make_policies(const CohortSpec& spec, std::uint64_t seed);

}  // namespace ideajudge
