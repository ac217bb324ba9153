#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace confbandit {

/// The three factorized decision axes. The enumerator value doubles as the
/// head index inside PolicyParams.
enum class Axis : std::size_t { instruction = 0, temperature = 1, steps = 2 };

inline constexpr std::array<Axis, 3> kAxes = {Axis::instruction, Axis::temperature, Axis::steps};

std::string_view axis_name(Axis axis) noexcept;

/// One joint configuration: the bandit arm.
struct ActionTriple {
  std::size_t instruction_index = 0;  // row-major over (base, variation)
  std::size_t temperature_index = 0;
  std::size_t steps_index = 0;

  std::size_t operator[](Axis axis) const noexcept;
  std::size_t& operator[](Axis axis) noexcept;

  friend auto operator<=>(const ActionTriple&, const ActionTriple&) = default;
};

/// A triple looked up against its space.
struct RenderedConfig {
  std::string instruction_text;
  double temperature = 0.0;
  int steps = 0;

  friend bool operator==(const RenderedConfig&, const RenderedConfig&) = default;
};

/// Discrete configuration space A = A_p x A_t x A_s. Immutable after
/// construction; the constructor enforces every invariant.
class ActionSpace {
 public:
  ActionSpace(std::vector<int> steps_values, std::vector<double> temperature_values,
              std::vector<std::string> base_instructions,
              std::vector<std::string> variation_instructions);

  const std::vector<int>& steps_values() const noexcept { return steps_; }
  const std::vector<double>& temperature_values() const noexcept { return temperatures_; }
  const std::vector<std::string>& base_instructions() const noexcept { return bases_; }
  const std::vector<std::string>& variation_instructions() const noexcept { return variations_; }

  std::size_t instruction_count() const noexcept { return bases_.size() * variations_.size(); }
  std::size_t temperature_count() const noexcept { return temperatures_.size(); }
  std::size_t steps_count() const noexcept { return steps_.size(); }
  std::size_t axis_size(Axis axis) const noexcept;
  std::size_t joint_size() const noexcept;

  /// "<base> <variation>" for a row-major instruction index.
  std::string instruction_text(std::size_t instruction_index) const;

  /// Throws BoundsError naming the first offending axis.
  void check(const ActionTriple& triple) const;

  RenderedConfig resolve(const ActionTriple& triple) const;

  /// instruction * |A_t| * |A_s| + temperature * |A_s| + steps.
  std::size_t flat_index(const ActionTriple& triple) const;
  ActionTriple from_flat(std::size_t flat) const;

  friend bool operator==(const ActionSpace&, const ActionSpace&) = default;

 private:
  std::vector<int> steps_;
  std::vector<double> temperatures_;
  std::vector<std::string> bases_;
  std::vector<std::string> variations_;
};

/// 8 step counts (3..10), 11 temperatures (0.0..1.0), 10 x 10 instructions.
ActionSpace build_default_space();

RenderedConfig resolve(const ActionSpace& space, const ActionTriple& triple);

/// Fills the answer-generation template. Throws ValidationError on an empty
/// question.
std::string render_generation_prompt(std::string_view question, const RenderedConfig& config);

/// The raw generation template with its {question}, {instruction_prompt}
/// and {optimal_steps} placeholders.
std::string_view generation_template() noexcept;

// JSON form uses the field names steps_values, temperature_values,
// base_instructions, variation_instructions.
void to_json(nlohmann::json& j, const ActionSpace& space);
ActionSpace action_space_from_json(const nlohmann::json& j);
ActionSpace load_action_space(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ActionTriple& triple);
void from_json(const nlohmann::json& j, ActionTriple& triple);

}  // namespace confbandit
