#include "confbandit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "confbandit/seeding.hpp"

namespace confbandit {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be a positive finite number");
  }
  if (trials_per_question < 1) throw ValidationError("trials_per_question must be >= 1");
  if (!(tau_min > 0.0) || !(tau0 >= tau_min) || !std::isfinite(tau0)) {
    throw ValidationError("need tau0 >= tau_min > 0");
  }
  if (anneal_alpha && !(*anneal_alpha > 0.0 && *anneal_alpha <= 1.0)) {
    throw ValidationError("anneal_alpha must lie in (0, 1]");
  }
  if (!(reward_low < reward_high) || !std::isfinite(reward_low) || !std::isfinite(reward_high)) {
    throw ValidationError("need reward_low < reward_high");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"trials_per_question", c.trials_per_question},
                     {"tau0", c.tau0},
                     {"tau_min", c.tau_min},
                     {"anneal_alpha", nullptr},
                     {"reward_low", c.reward_low},
                     {"reward_high", c.reward_high},
                     {"seed", c.seed},
                     {"tempered_grad", c.tempered_grad},
                     {"shuffle_seed", nullptr},
                     {"snapshot_stride", c.snapshot_stride}};
  if (c.anneal_alpha) j["anneal_alpha"] = *c.anneal_alpha;
  if (c.shuffle_seed) j["shuffle_seed"] = *c.shuffle_seed;
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.trials_per_question = j.value("trials_per_question", c.trials_per_question);
    c.tau0 = j.value("tau0", c.tau0);
    c.tau_min = j.value("tau_min", c.tau_min);
    if (auto it = j.find("anneal_alpha"); it != j.end() && !it->is_null()) c.anneal_alpha = it->get<double>();
    c.reward_low = j.value("reward_low", c.reward_low);
    c.reward_high = j.value("reward_high", c.reward_high);
    c.seed = j.value("seed", c.seed);
    c.tempered_grad = j.value("tempered_grad", c.tempered_grad);
    if (auto it = j.find("shuffle_seed"); it != j.end() && !it->is_null()) {
      c.shuffle_seed = it->get<std::uint64_t>();
    }
    c.snapshot_stride = j.value("snapshot_stride", c.snapshot_stride);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
}

double resolve_anneal_alpha(const TrainConfig& config, std::optional<std::size_t> horizon) {
  if (config.anneal_alpha) return *config.anneal_alpha;
  if (config.tau0 == config.tau_min) return 1.0;
  if (horizon && *horizon > 1) {
    return std::pow(config.tau_min / config.tau0, 1.0 / static_cast<double>(*horizon - 1));
  }
  return 0.98;
}

double anneal_tau(const TrainConfig& config, double alpha, std::uint64_t step) {
  return std::max(config.tau_min, config.tau0 * std::pow(alpha, static_cast<double>(step)));
}

double anneal_tau(const TrainConfig& config, std::uint64_t step) {
  return anneal_tau(config, resolve_anneal_alpha(config), step);
}

Transition reinforce_step(PolicyParams& params, const TrainingExample& example, Environment& env,
                          const TrainConfig& config, std::uint64_t step, double tau) {
  const PolicyDecision decision =
      sample(params, example.context, tau, derive_seed(config.seed, "sample", step));
  const RewardOutcome outcome =
      env.reward(example.pair, decision.triple, derive_seed(config.seed, "reward", step));
  if (!std::isfinite(outcome.reward)) {
    throw EnvironmentError("non-finite reward for question '" + example.pair.id + "' at step " +
                           std::to_string(step));
  }
  const double r = std::clamp(
      config.reward_low + (config.reward_high - config.reward_low) * std::clamp(outcome.reward, 0.0, 1.0),
      config.reward_low, config.reward_high);

  Transition t;
  t.question_id = example.pair.id;
  t.triple = decision.triple;
  t.reward = r;
  t.logp = decision.logp;
  t.tau_used = tau;
  t.step = step;
  t.source = outcome.source;
  if (r != 0.0) {
    const PolicyGradient g =
        grad_log_prob(params, example.context, decision.triple, config.tempered_grad ? tau : 1.0);
    params.add_scaled(g, config.learning_rate * r);
    t.grad_sq_norm = r * r * g.squared_norm();
  }
  return t;
}

TrainReport train(PolicyParams params, std::span<const TrainingExample> examples, Environment& env,
                  const TrainConfig& config) {
  config.validate();
  if (examples.empty()) throw ValidationError("training set is empty");

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (config.shuffle_seed) {
    Rng rng(derive_seed(*config.shuffle_seed, "shuffle"));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[j]);
    }
  }

  const std::size_t horizon = examples.size() * config.trials_per_question;
  auto report = std::make_shared<TrainReport>();
  report->alpha = resolve_anneal_alpha(config, horizon);
  report->transitions.reserve(horizon);
  report->mean_reward_curve.reserve(horizon);
  report->gradient_sq_norm_curve.reserve(horizon);

  double reward_sum = 0.0;
  std::uint64_t step = 0;
  for (std::size_t idx : order) {
    for (std::size_t trial = 0; trial < config.trials_per_question; ++trial, ++step) {
      if (config.snapshot_stride > 0 && step % config.snapshot_stride == 0) {
        report->snapshots.push_back({step, params});
      }
      Transition t;
      try {
        t = reinforce_step(params, examples[idx], env, config, step, anneal_tau(config, report->alpha, step));
      } catch (const Error& e) {
        report->final_params = params;
        throw TrainingError(std::string("training aborted at step ") + std::to_string(step) + ": " + e.what(),
                            report);
      }
      reward_sum += t.reward;
      report->mean_reward_curve.push_back(reward_sum / static_cast<double>(step + 1));
      report->gradient_sq_norm_curve.push_back(t.grad_sq_norm);
      report->transitions.push_back(std::move(t));
    }
  }
  if (config.snapshot_stride > 0) report->snapshots.push_back({step, params});
  report->final_params = std::move(params);
  return std::move(*report);
}

ObjectiveEstimate estimate_objective(const PolicyParams& params,
                                     std::span<const TrainingExample> probes, Environment& env,
                                     std::size_t n_samples, std::uint64_t seed, double tau) {
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  if (probes.empty()) throw ValidationError("need at least one probe question");
  // Welford: a constant reward stream yields exactly that constant.
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t draw = 0;
  for (const auto& probe : probes) {
    for (std::size_t n = 0; n < n_samples; ++n) {
      const auto decision = sample(params, probe.context, tau, derive_seed(seed, "objective-sample", draw));
      const double r = env.reward(probe.pair, decision.triple, derive_seed(seed, "objective-reward", draw)).reward;
      ++draw;
      const double delta = r - mean;
      mean += delta / static_cast<double>(draw);
      m2 += delta * (r - mean);
    }
  }
  ObjectiveEstimate est;
  est.mean = mean;
  est.samples = draw;
  const auto n = static_cast<double>(draw);
  est.std_error = draw > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0;
  return est;
}

}  // namespace confbandit
