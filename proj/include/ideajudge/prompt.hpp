#pragma once

#include <cstddef>
#include <string>

#include "ideajudge/conditioning.hpp"
#include "ideajudge/corpus.hpp"

namespace ideajudge {

struct RenderConfig {
  /// Characters of abstract + claims kept per rendered patent.
  std::size_t patent_char_budget = 4000;
  /// Render patent text inside few-shot examples (the target always has it).
  bool include_example_patents = true;
};

/// The four template sections of a judge prompt. `text()` is what a backend
/// sees and what the response cache hashes.
struct PromptBundle {
  std::string instruction;
  std::string examples;  // empty for zero-shot
  std::string input;
  std::string output_contract;
  std::size_t n_examples = 0;

  std::string text() const;
  bool operator==(const PromptBundle&) const = default;
};

/// Fixed task framing placed before the sections.
extern const char* const kPromptPreamble;
/// Fixed output-format section body.
extern const char* const kOutputContract;

PromptBundle render_prompt(const Corpus& corpus, const TargetInstance& target,
                           const ConditioningSet& conditioning,
                           const RenderConfig& config = {});

/// Patent title, then abstract and claims cut to `budget` characters.
std::string render_patent(const Patent& patent, std::size_t budget);
std::string render_idea(const Idea& idea);
std::string render_instruction(Dimension dimension);

}  // namespace ideajudge
