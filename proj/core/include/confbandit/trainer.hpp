#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "confbandit/config_space.hpp"
#include "confbandit/embedder.hpp"
#include "confbandit/environment.hpp"
#include "confbandit/errors.hpp"
#include "confbandit/policy_net.hpp"

namespace confbandit {

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t trials_per_question = 4;
  double tau0 = 1.0;
  double tau_min = 0.1;
  // Derived from the run length when unset, see resolve_anneal_alpha.
  std::optional<double> anneal_alpha;
  double reward_low = 0.0;
  double reward_high = 1.0;
  std::uint64_t seed = 0;
  // Differentiate log softmax(z / tau) at the sampling temperature instead
  // of at tau = 1.
  bool tempered_grad = true;
  std::optional<std::uint64_t> shuffle_seed;
  // Keep a parameter snapshot every this many steps (0 = none).
  std::size_t snapshot_stride = 0;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void to_json(nlohmann::json& j, const TrainConfig& config);
void from_json(const nlohmann::json& j, TrainConfig& config);

/// The configured alpha, else (tau_min/tau0)^(1/(K-1)) for a known horizon
/// K > 1, else 0.98.
double resolve_anneal_alpha(const TrainConfig& config, std::optional<std::size_t> horizon = {});

/// max(tau_min, tau0 * alpha^k) for the global step k.
double anneal_tau(const TrainConfig& config, double alpha, std::uint64_t step);
double anneal_tau(const TrainConfig& config, std::uint64_t step);

/// A question together with its embedded context.
struct TrainingExample {
  QAPair pair;
  Embedding context;
};

struct Transition {
  std::string question_id;
  ActionTriple triple;
  double reward = 0.0;
  std::array<double, 3> logp{};
  double tau_used = 1.0;
  std::uint64_t step = 0;
  // Squared norm of the applied stochastic gradient r * grad log pi.
  double grad_sq_norm = 0.0;
  RewardSource source = RewardSource::sim;
};

struct ParamSnapshot {
  std::uint64_t step = 0;  // parameters before this step's update
  PolicyParams params;
};

struct TrainReport {
  std::vector<Transition> transitions;
  PolicyParams final_params;
  std::vector<double> mean_reward_curve;  // running mean of rewards
  std::vector<double> gradient_sq_norm_curve;
  std::vector<ParamSnapshot> snapshots;
  double alpha = 1.0;
};

/// Raised when a trial fails; carries everything recorded so far.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::shared_ptr<const TrainReport> partial)
      : Error(what), partial_(std::move(partial)) {}
  const TrainReport& partial() const noexcept { return *partial_; }

 private:
  std::shared_ptr<const TrainReport> partial_;
};

/// One trial: sample at tau, query the environment, apply
/// params += lr * r * grad log pi. A zero reward leaves params untouched.
Transition reinforce_step(PolicyParams& params, const TrainingExample& example, Environment& env,
                          const TrainConfig& config, std::uint64_t step, double tau);

/// Single pass over the examples (optionally shuffled), T trials each.
TrainReport train(PolicyParams params, std::span<const TrainingExample> examples, Environment& env,
                  const TrainConfig& config);

struct ObjectiveEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo J(params): n_samples draws per probe at the given tau.
ObjectiveEstimate estimate_objective(const PolicyParams& params,
                                     std::span<const TrainingExample> probes, Environment& env,
                                     std::size_t n_samples, std::uint64_t seed, double tau = 1.0);

}  // namespace confbandit
