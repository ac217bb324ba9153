#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "confbandit/config_space.hpp"
#include "confbandit/embedder.hpp"

namespace confbandit {

/// Fully connected layer y = W x + b, W stored (out x in).
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  std::size_t inputs() const noexcept { return static_cast<std::size_t>(weight.cols()); }
  std::size_t outputs() const noexcept { return static_cast<std::size_t>(weight.rows()); }
};

/// Shape knobs that are not determined by the action space.
struct PolicyArchitecture {
  std::size_t hidden_width = 64;
  std::vector<std::size_t> head_interior = {128, 64};
  // Fixed multiplier applied to the unit-norm context before the shared layer.
  double input_gain = 8.0;

  friend bool operator==(const PolicyArchitecture&, const PolicyArchitecture&) = default;
};

/// Theta = {shared tanh encoder, instruction head, temperature head, steps head}.
/// Heads are ReLU stacks with a linear output layer. The same type carries
/// gradients, which are shaped exactly like the parameters.
struct PolicyParams {
  std::size_t input_width = 0;
  std::size_t hidden_width = 0;
  double input_gain = 1.0;
  DenseLayer shared;
  std::array<std::vector<DenseLayer>, 3> heads;  // indexed by Axis

  const std::vector<DenseLayer>& head(Axis axis) const { return heads[static_cast<std::size_t>(axis)]; }
  std::vector<DenseLayer>& head(Axis axis) { return heads[static_cast<std::size_t>(axis)]; }
  std::size_t head_outputs(Axis axis) const { return head(axis).back().outputs(); }

  /// Same shapes, all entries zero.
  PolicyParams zeros_like() const;
  /// this += scale * other (shapes must match).
  void add_scaled(const PolicyParams& other, double scale);
  double squared_norm() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  bool same_shape(const PolicyParams& other) const;

  /// Visits every weight/bias block in a fixed order (shared, then heads
  /// in axis order, weight before bias).
  void for_each_block(const std::function<void(Eigen::Map<Eigen::VectorXd>)>& fn);
  void for_each_block(const std::function<void(Eigen::Map<const Eigen::VectorXd>)>& fn) const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);

  /// Bitwise equality of shapes and every parameter.
  friend bool operator==(const PolicyParams& a, const PolicyParams& b);
};

using PolicyGradient = PolicyParams;

/// Xavier-uniform weights (variance 2/(fan_in+fan_out)), zero biases.
/// Fully determined by `seed`.
PolicyParams init_params(const ActionSpace& space, std::size_t input_width, std::uint64_t seed,
                         const PolicyArchitecture& arch = {});

/// softmax(logits / tau) with max-logit subtraction. tau must be > 0.
Eigen::VectorXd tempered_softmax(const Eigen::VectorXd& logits, double tau);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(const Eigen::VectorXd& v);

struct HeadDistribution {
  Eigen::VectorXd logits;
  Eigen::VectorXd probabilities;
  double tau = 1.0;
};

struct PolicyOutput {
  Eigen::VectorXd hidden;
  std::array<HeadDistribution, 3> heads;

  const HeadDistribution& head(Axis axis) const { return heads[static_cast<std::size_t>(axis)]; }
};

/// Throws ValidationError for tau <= 0, a width mismatch or a non-finite context.
PolicyOutput forward(const PolicyParams& params, const Embedding& context, double tau = 1.0);

struct PolicyDecision {
  ActionTriple triple;
  std::array<double, 3> logp{};  // per head, evaluated at tau = 1
  Eigen::VectorXd hidden;

  double total_logp() const noexcept { return logp[0] + logp[1] + logp[2]; }
};

/// Independent draw on each axis from softmax(logits / tau).
PolicyDecision sample(const PolicyParams& params, const Embedding& context, double tau,
                      std::uint64_t rng_seed);

/// Per-axis argmax of the tau = 1 distribution.
ActionTriple greedy(const PolicyParams& params, const Embedding& context);

/// log pi_p(a_p) + log pi_t(a_t) + log pi_s(a_s) under softmax(logits / tau).
double log_prob(const PolicyParams& params, const Embedding& context, const ActionTriple& triple,
                double tau = 1.0);

/// Exact gradient of log_prob with respect to every parameter. The shared
/// block is the sum of the three heads' back-propagated contributions.
PolicyGradient grad_log_prob(const PolicyParams& params, const Embedding& context,
                             const ActionTriple& triple, double tau = 1.0);

/// Gradient of a single head's log-probability (other heads' blocks are zero).
PolicyGradient grad_log_prob_head(const PolicyParams& params, const Embedding& context, Axis axis,
                                  std::size_t arm, double tau = 1.0);

/// Probability-weighted sum of per-arm gradients: sum_a weight(a) * pi(a) *
/// grad log pi(a) over the joint space, i.e. the exact policy gradient of
/// E_pi[weight]. Cost is one backward pass per joint arm.
PolicyGradient expected_gradient(const PolicyParams& params, const Embedding& context,
                                 const ActionSpace& space,
                                 const std::function<double(const ActionTriple&)>& weight);

}  // namespace confbandit
