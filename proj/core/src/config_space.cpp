#include "confbandit/config_space.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "confbandit/errors.hpp"
#include "confbandit/templates.hpp"

namespace confbandit {
namespace {

constexpr std::string_view kGenerationTemplate =
    "1. Objective\n"
    "Your task is to generate a comprehensive answer to the provided question while "
    "tailoring your reasoning and response style to the specific demands of the task. "
    "Ensure that your answer fully adheres to the requirements without inventing any "
    "details.\n"
    "\n"
    "2. Question: {question}\n"
    "\n"
    "3. Adaptive Reasoning Strategy\n"
    "Use the following instructions to shape your response: {instruction_prompt}. "
    "Reason in according to the given method and adjust your reasoning approach "
    "dynamically based on the nature of the question:\n"
    "\n"
    "You must follow no more than {optimal_steps} reasoning steps.\n"
    "\n"
    "Requirements:\n"
    "1. Provide one answer that completely satisfies the question's requirements.\n"
    "2. Ensure your reasoning strictly adheres to the specified steps and covers all "
    "necessary details.\n"
    "3. Deliver a clear, precise, and accurate answer.\n"
    "4. Avoid repetition or ambiguity; your response should be distinct and well-reasoned.";

const std::vector<std::string>& default_bases() {
  static const std::vector<std::string> bases = {
      "Break down your reasoning into clear, sequential steps.",
      "Systematically structure your analysis, elaborating on each step with thorough detail.",
      "Examine the logical connections between concepts and articulate each step in depth.",
      "Consider multiple perspectives and explore alternative viewpoints comprehensively.",
      "Apply creative reasoning to unearth unconventional insights and challenge standard "
      "assumptions.",
      "Adopt a detailed and rigorous approach, balancing specific details with overarching "
      "themes.",
      "Reflect on your assumptions and refine your argument through critical self-questioning "
      "and validation.",
      "Explain your reasoning step-by-step in a clear, accessible manner for all audiences.",
      "Include a systematic self-check and verification of your reasoning process to ensure "
      "consistency.",
      "Conclude by summarizing your key points and re-evaluating your final answer for "
      "completeness.",
  };
  return bases;
}

const std::vector<std::string>& default_variations() {
  static const std::vector<std::string> variations = {
      "Thoroughly analyze all possible interpretations for comprehensive understanding.",
      "Decompose the problem into smaller, logical components for clarity and precision.",
      "Cross-reference reasoning with similar examples or prior cases for validation.",
      "Review and verify each step to ensure no key detail is overlooked.",
      "Challenge conventional thinking while maintaining logical soundness.",
      "Ensure every premise is clearly understood and meticulously applied.",
      "Pay close attention to minor details that might otherwise be neglected.",
      "Use simple, straightforward language to guarantee clarity and accessibility.",
      "Perform a detailed self-audit to detect and correct inconsistencies.",
      "Validate conclusions by aligning them with established principles or empirical data.",
  };
  return variations;
}

void require_text_list(const std::vector<std::string>& list, std::string_view name) {
  if (list.empty()) throw ValidationError(std::string(name) + " must not be empty");
  for (const auto& s : list) {
    if (s.empty()) throw ValidationError(std::string(name) + " contains an empty entry");
  }
}

}  // namespace

std::string_view axis_name(Axis axis) noexcept {
  switch (axis) {
    case Axis::instruction: return "instruction";
    case Axis::temperature: return "temperature";
    case Axis::steps: return "steps";
  }
  return "unknown";
}

std::size_t ActionTriple::operator[](Axis axis) const noexcept {
  switch (axis) {
    case Axis::instruction: return instruction_index;
    case Axis::temperature: return temperature_index;
    case Axis::steps: return steps_index;
  }
  return 0;
}

std::size_t& ActionTriple::operator[](Axis axis) noexcept {
  switch (axis) {
    case Axis::temperature: return temperature_index;
    case Axis::steps: return steps_index;
    case Axis::instruction: break;
  }
  return instruction_index;
}

ActionSpace::ActionSpace(std::vector<int> steps_values, std::vector<double> temperature_values,
                         std::vector<std::string> base_instructions,
                         std::vector<std::string> variation_instructions)
    : steps_(std::move(steps_values)),
      temperatures_(std::move(temperature_values)),
      bases_(std::move(base_instructions)),
      variations_(std::move(variation_instructions)) {
  if (steps_.empty()) throw ValidationError("steps_values must not be empty");
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i] < 3 || steps_[i] > 10) {
      throw ValidationError("steps_values entries must lie in [3, 10]");
    }
    if (i > 0 && steps_[i] <= steps_[i - 1]) {
      throw ValidationError("steps_values must be strictly increasing");
    }
  }
  if (temperatures_.empty()) throw ValidationError("temperature_values must not be empty");
  for (std::size_t i = 0; i < temperatures_.size(); ++i) {
    const double t = temperatures_[i];
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
      throw ValidationError("temperature_values entries must lie in [0, 1]");
    }
    if (i > 0 && t <= temperatures_[i - 1]) {
      throw ValidationError("temperature_values must be strictly increasing");
    }
  }
  require_text_list(bases_, "base_instructions");
  require_text_list(variations_, "variation_instructions");
}

std::size_t ActionSpace::axis_size(Axis axis) const noexcept {
  switch (axis) {
    case Axis::instruction: return instruction_count();
    case Axis::temperature: return temperature_count();
    case Axis::steps: return steps_count();
  }
  return 0;
}

std::size_t ActionSpace::joint_size() const noexcept {
  return instruction_count() * temperature_count() * steps_count();
}

std::string ActionSpace::instruction_text(std::size_t instruction_index) const {
  if (instruction_index >= instruction_count()) {
    throw BoundsError("instruction", instruction_index, instruction_count());
  }
  const auto& base = bases_[instruction_index / variations_.size()];
  const auto& variation = variations_[instruction_index % variations_.size()];
  return base + " " + variation;
}

void ActionSpace::check(const ActionTriple& triple) const {
  for (Axis axis : kAxes) {
    if (triple[axis] >= axis_size(axis)) {
      throw BoundsError(std::string(axis_name(axis)), triple[axis], axis_size(axis));
    }
  }
}

RenderedConfig ActionSpace::resolve(const ActionTriple& triple) const {
  check(triple);
  return RenderedConfig{instruction_text(triple.instruction_index),
                        temperatures_[triple.temperature_index], steps_[triple.steps_index]};
}

std::size_t ActionSpace::flat_index(const ActionTriple& triple) const {
  check(triple);
  return (triple.instruction_index * temperature_count() + triple.temperature_index) *
             steps_count() +
         triple.steps_index;
}

ActionTriple ActionSpace::from_flat(std::size_t flat) const {
  if (flat >= joint_size()) throw BoundsError("joint", flat, joint_size());
  ActionTriple t;
  t.steps_index = flat % steps_count();
  flat /= steps_count();
  t.temperature_index = flat % temperature_count();
  t.instruction_index = flat / temperature_count();
  return t;
}

ActionSpace build_default_space() {
  std::vector<int> steps;
  for (int s = 3; s <= 10; ++s) steps.push_back(s);
  std::vector<double> temperatures;
  for (int k = 0; k <= 10; ++k) temperatures.push_back(static_cast<double>(k) / 10.0);
  return ActionSpace(std::move(steps), std::move(temperatures), default_bases(),
                     default_variations());
}

RenderedConfig resolve(const ActionSpace& space, const ActionTriple& triple) {
  return space.resolve(triple);
}

std::string_view generation_template() noexcept { return kGenerationTemplate; }

std::string render_generation_prompt(std::string_view question, const RenderedConfig& config) {
  if (question.empty()) throw ValidationError("question must not be empty");
  return fill_template(kGenerationTemplate,
                       {{"question", std::string(question)},
                        {"instruction_prompt", config.instruction_text},
                        {"optimal_steps", std::to_string(config.steps)}});
}

void to_json(nlohmann::json& j, const ActionSpace& space) {
  j = nlohmann::json{{"steps_values", space.steps_values()},
                     {"temperature_values", space.temperature_values()},
                     {"base_instructions", space.base_instructions()},
                     {"variation_instructions", space.variation_instructions()}};
}

ActionSpace action_space_from_json(const nlohmann::json& j) {
  try {
    return ActionSpace(j.at("steps_values").get<std::vector<int>>(),
                       j.at("temperature_values").get<std::vector<double>>(),
                       j.at("base_instructions").get<std::vector<std::string>>(),
                       j.at("variation_instructions").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("action space: ") + e.what());
  }
}

ActionSpace load_action_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open action space file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return action_space_from_json(j);
}

void to_json(nlohmann::json& j, const ActionTriple& triple) {
  j = nlohmann::json{{"instruction_index", triple.instruction_index},
                     {"temperature_index", triple.temperature_index},
                     {"steps_index", triple.steps_index}};
}

void from_json(const nlohmann::json& j, ActionTriple& triple) {
  j.at("instruction_index").get_to(triple.instruction_index);
  j.at("temperature_index").get_to(triple.temperature_index);
  j.at("steps_index").get_to(triple.steps_index);
}

BoundsError::BoundsError(std::string axis, std::size_t index, std::size_t bound)
    : ValidationError(axis + " index " + std::to_string(index) + " out of bounds (size " +
                      std::to_string(bound) + ")"),
      axis_(std::move(axis)),
      index_(index),
      bound_(bound) {}

}  // namespace confbandit
