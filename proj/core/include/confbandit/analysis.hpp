#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "confbandit/config_space.hpp"
#include "confbandit/environment.hpp"
#include "confbandit/trainer.hpp"

namespace confbandit {

// ---------------------------------------------------------------------------
// Regret

struct RegretTrace {
  std::vector<double> instantaneous;  // delta_k
  std::vector<double> cumulative;     // R(k + 1)
  std::vector<std::size_t> pulls;     // per joint arm, by flat index
  std::size_t arm_count = 0;

  std::size_t steps() const noexcept { return instantaneous.size(); }
  double total() const noexcept { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// Exact regret against the noiseless table. Throws UnsupportedError when a
/// transition did not come from the simulator.
RegretTrace compute_regret(std::span<const Transition> transitions, const SimSpec& spec);

/// Same, but rejects environments that expose no mean table.
RegretTrace compute_regret(std::span<const Transition> transitions, const Environment& env);

/// Transitions of a policy that ignores the context and draws triples
/// uniformly, visiting questions in order, `trials` times each. Rewards are
/// drawn from the simulator.
std::vector<Transition> uniform_policy_run(const SimSpec& spec, std::span<const QAPair> questions,
                                           std::size_t trials, std::uint64_t seed);

struct SublinearityReport {
  std::vector<std::size_t> prefixes;  // K / 2^j, ascending
  std::vector<double> ratios;         // R(2k) / R(k) for consecutive prefixes
  double mean_ratio = 0.0;
  double fitted_c = 0.0;              // R(k) ~ c sqrt(k |A| ln |A|)
  bool sublinear = false;

  std::size_t doublings() const noexcept { return ratios.size(); }
};

inline constexpr double kSublinearRatioThreshold = 1.6;
inline constexpr std::size_t kMinSublinearityHorizon = 1000;

/// Doubling ratios over trace prefixes. Throws ValidationError when the
/// trace has fewer than 1000 steps.
SublinearityReport sublinearity_check(const RegretTrace& trace);

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceProbe {
  std::span<const TrainingExample> probes;
  SimEnvironment* env = nullptr;
  double learning_rate = 0.01;
  std::size_t objective_samples = 200;  // per probe, for J(theta_0)
  std::size_t lipschitz_pairs = 20;
  std::size_t variance_snapshots = 10;
  double perturbation = 1e-3;
  std::uint64_t seed = 0;
};

struct ConvergenceReport {
  std::size_t steps = 0;
  double learning_rate = 0.0;
  double mean_sq_grad = 0.0;           // (1/K) sum ||grad J(theta_k)||^2, exact gradients
  double mean_sq_grad_stderr = 0.0;
  double recorded_sq_grad = 0.0;       // mean of the applied stochastic ||g_k||^2
  double j_star = 0.0;
  double j0 = 0.0;
  double j0_stderr = 0.0;
  double lipschitz = 0.0;              // L-hat
  double sigma_sq = 0.0;               // sigma-hat^2
  double optimality_term = 0.0;        // 2 (J* - J0) / (eta K)
  double noise_term = 0.0;             // L eta sigma^2
  double bound = 0.0;
  double tolerance = 0.0;              // estimation slack applied to the comparison
  bool step_size_ok = false;           // eta <= 1 / L-hat
  bool within_bound = false;
};

/// J(params) over the probes, computed exactly from the mean table.
double exact_objective(const PolicyParams& params, std::span<const TrainingExample> probes,
                       const SimSpec& spec);

/// Exact grad J(params) over the probes.
PolicyGradient exact_objective_gradient(const PolicyParams& params,
                                        std::span<const TrainingExample> probes, const SimSpec& spec);

/// Evaluates both sides of the nonconvex SGD bound for a simulated run.
/// The report must carry parameter snapshots (snapshot_stride > 0).
ConvergenceReport convergence_report(const TrainReport& report, const ConvergenceProbe& probe);

// ---------------------------------------------------------------------------
// Action statistics

struct ActionStats {
  std::array<std::vector<std::size_t>, 3> histograms;  // by Axis
  std::size_t decisions = 0;
  double steps_mean = 0.0;
  double steps_std = 0.0;
  double temperature_mean = 0.0;
  double temperature_std = 0.0;
  // (instruction index, count), most frequent first, ties by lower index.
  std::vector<std::pair<std::size_t, std::size_t>> top_instructions;
};

ActionStats action_stats(std::span<const ActionTriple> decisions, const ActionSpace& space,
                         std::size_t top_n = 10);
ActionStats action_stats(std::span<const Transition> transitions, const ActionSpace& space,
                         std::size_t top_n = 10);

// ---------------------------------------------------------------------------
// Oracle

inline constexpr std::size_t kJointOracleLimit = 1000;

/// Exhaustive argmax of the bucket's mean table (lowest flat index on ties).
ActionTriple joint_oracle(const SimSpec& spec, std::size_t bucket);
/// One joint-optimal triple per question. Rejects spaces with more than
/// 1000 joint arms.
std::vector<ActionTriple> joint_oracle(const SimSpec& spec, std::span<const QAPair> questions);

// ---------------------------------------------------------------------------
// Export

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Full per-trial record: k, question_id, instruction, temperature, steps,
/// tau, reward, logp_instruction, logp_temperature, logp_steps,
/// grad_sq_norm, source.
void write_transitions_csv(std::ostream& out, std::span<const Transition> transitions);
std::vector<Transition> read_transitions_csv(std::istream& in);

/// One row per step: k, tau, reward, regret, cum_regret, grad_sq_norm.
/// Regret columns are empty when `regret` is null.
void write_step_csv(std::ostream& out, std::span<const Transition> transitions,
                    const RegretTrace* regret);

struct StepRow {
  std::uint64_t k = 0;
  double tau = 0.0;
  double reward = 0.0;
  std::optional<double> regret;
  std::optional<double> cum_regret;
  double grad_sq_norm = 0.0;
};
std::vector<StepRow> read_step_csv(std::istream& in);

void to_json(nlohmann::json& j, const SublinearityReport& r);
void to_json(nlohmann::json& j, const ConvergenceReport& r);
void to_json(nlohmann::json& j, const ActionStats& s);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace confbandit
