#include "ideajudge/prompt.hpp"

#include "ideajudge/text.hpp"

namespace ideajudge {

const char* const kPromptPreamble =
    "You are given a pair consisting of a patent and a product idea based on that\n"
    "patent. Your task is to evaluate the idea following the given instruction.\n"
    "First, you will receive a detailed instruction. If the setting is few-shot,\n"
    "several examples of patents, ideas, and scores are also provided. Finally,\n"
    "you will be given a new patent and idea to evaluate.\n";

const char* const kOutputContract =
    "Return a single line of valid JSON in this format:\n"
    "{\"score\": <number>, \"reason\": \"<brief reason>\", "
    "\"confidence\": <integer between 0 and 100>}\n";

std::string PromptBundle::text() const {
  std::string out = kPromptPreamble;
  out += "\n## Instruction\n";
  out += instruction;
  if (!examples.empty()) {
    out += "\n## Examples\n";
    out += examples;
  }
  out += "\n## Input\n";
  out += input;
  out += "\n## Output format\n";
  out += output_contract;
  return out;
}

std::string render_patent(const Patent& patent, std::size_t budget) {
  std::string out = "Patent title: " + patent.title + "\n";
  std::size_t left = budget;
  auto take = [&](std::string_view s) {
    auto kept = utf8_prefix(s, left);
    left -= kept.size();
    return std::string(kept);
  };
  out += "Abstract: " + take(patent.abstract) + "\n";
  if (!patent.claims.empty() && left > 0) {
    out += "Claims:\n";
    for (std::size_t i = 0; i < patent.claims.size() && left > 0; ++i) {
      out += std::to_string(i + 1) + ". " + take(patent.claims[i]) + "\n";
    }
  }
  return out;
}

std::string render_idea(const Idea& idea) {
  return "Product title: " + idea.title + "\nProduct description: " + idea.description +
         "\nImplementation: " + idea.implementation +
         "\nDifferentiation: " + idea.differentiation + "\n";
}

std::string render_instruction(Dimension dimension) {
  const auto& spec = dimension_spec(dimension);
  std::string out = "Evaluate the idea on " + spec.name + ": " + spec.description + "\n";
  if (!spec.preamble.empty()) out += spec.preamble + "\n";
  out += "Score levels:\n";
  for (const auto& lvl : spec.rubric_levels) {
    out += std::to_string(lvl.score) + ". " + lvl.description + "\n";
  }
  out += "The score must be an integer from " + std::to_string(spec.scale_min) + " to " +
         std::to_string(spec.scale_max) + ".\n";
  return out;
}

PromptBundle render_prompt(const Corpus& corpus, const TargetInstance& target,
                           const ConditioningSet& conditioning, const RenderConfig& config) {
  PromptBundle bundle;
  bundle.instruction = render_instruction(target.dimension);
  for (std::size_t i = 0; i < conditioning.examples.size(); ++i) {
    const auto& ex = conditioning.examples[i];
    bundle.examples += "### Example " + std::to_string(i + 1) + "\n";
    if (config.include_example_patents) {
      bundle.examples += render_patent(corpus.patent(ex.patent_id), config.patent_char_budget);
    }
    bundle.examples += render_idea(corpus.idea(ex.idea_id));
    bundle.examples += "Score: " + std::to_string(ex.score) + "\n";
  }
  bundle.n_examples = conditioning.examples.size();
  bundle.input = render_patent(corpus.patent(target.patent_id), config.patent_char_budget) +
                 render_idea(corpus.idea(target.idea_id));
  bundle.output_contract = kOutputContract;
  return bundle;
}

}  // namespace ideajudge
