#include "confbandit/policy_net.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "confbandit/errors.hpp"
#include "confbandit/seeding.hpp"

namespace confbandit {
namespace {

DenseLayer xavier_layer(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
  // Row-major fill so the draw order does not depend on Eigen's storage order.
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      layer.weight(r, c) = (2.0 * unit_uniform(rng) - 1.0) * limit;
    }
  }
  return layer;
}

// Activations retained for back-propagation.
struct HeadTrace {
  std::vector<Eigen::VectorXd> inputs;  // inputs[l] feeds layer l; inputs[0] == hidden
  Eigen::VectorXd logits;
};

struct Trace {
  Eigen::VectorXd input;  // gain * context
  Eigen::VectorXd hidden;
  std::array<HeadTrace, 3> heads;
};

Trace run_forward(const PolicyParams& params, const Embedding& context) {
  if (context.width() != params.input_width) {
    throw ValidationError("context width " + std::to_string(context.width()) +
                          " does not match policy input width " +
                          std::to_string(params.input_width));
  }
  if (!context.values.allFinite()) throw ValidationError("context contains a non-finite value");
  Trace t;
  t.input = params.input_gain * context.values;
  t.hidden = (params.shared.weight * t.input + params.shared.bias).array().tanh().matrix();
  for (Axis axis : kAxes) {
    const auto& layers = params.head(axis);
    auto& ht = t.heads[static_cast<std::size_t>(axis)];
    Eigen::VectorXd z = t.hidden;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      ht.inputs.push_back(z);
      Eigen::VectorXd pre = layers[l].weight * z + layers[l].bias;
      z = (l + 1 < layers.size()) ? Eigen::VectorXd(pre.cwiseMax(0.0)) : pre;
    }
    ht.logits = std::move(z);
  }
  return t;
}

// d log softmax(logits/tau)[arm] / d logits.
Eigen::VectorXd log_softmax_grad(const Eigen::VectorXd& logits, std::size_t arm, double tau) {
  Eigen::VectorXd g = -tempered_softmax(logits, tau);
  g[static_cast<Eigen::Index>(arm)] += 1.0;
  return g / tau;
}

// Back-propagates per-head upstream logit gradients (empty vector = head
// contributes nothing) through the heads and the shared encoder.
PolicyGradient backward(const PolicyParams& params, const Trace& t,
                        const std::array<Eigen::VectorXd, 3>& upstream) {
  PolicyGradient grad = params.zeros_like();
  Eigen::VectorXd dhidden = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.hidden_width));
  for (Axis axis : kAxes) {
    const auto h = static_cast<std::size_t>(axis);
    if (upstream[h].size() == 0) continue;
    const auto& layers = params.head(axis);
    auto& glayers = grad.head(axis);
    const auto& ht = t.heads[h];
    Eigen::VectorXd g = upstream[h];
    for (std::size_t l = layers.size(); l-- > 0;) {
      glayers[l].weight.noalias() = g * ht.inputs[l].transpose();
      glayers[l].bias = g;
      Eigen::VectorXd gin = layers[l].weight.transpose() * g;
      if (l > 0) {
        // inputs[l] = relu(pre_{l-1}); its derivative is 1 where the output is positive.
        gin = (ht.inputs[l].array() > 0.0).select(gin, 0.0);
      }
      g = std::move(gin);
    }
    dhidden += g;
  }
  const Eigen::VectorXd dpre = dhidden.array() * (1.0 - t.hidden.array().square());
  grad.shared.weight.noalias() = dpre * t.input.transpose();
  grad.shared.bias = dpre;
  return grad;
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive and finite");
}

}  // namespace

PolicyParams PolicyParams::zeros_like() const {
  PolicyParams z = *this;
  z.shared.weight.setZero();
  z.shared.bias.setZero();
  for (auto& head : z.heads) {
    for (auto& layer : head) {
      layer.weight.setZero();
      layer.bias.setZero();
    }
  }
  return z;
}

void PolicyParams::for_each_block(const std::function<void(Eigen::Map<Eigen::VectorXd>)>& fn) {
  auto visit = [&](DenseLayer& layer) {
    fn(Eigen::Map<Eigen::VectorXd>(layer.weight.data(), layer.weight.size()));
    fn(Eigen::Map<Eigen::VectorXd>(layer.bias.data(), layer.bias.size()));
  };
  visit(shared);
  for (auto& head : heads) {
    for (auto& layer : head) visit(layer);
  }
}

void PolicyParams::for_each_block(
    const std::function<void(Eigen::Map<const Eigen::VectorXd>)>& fn) const {
  auto visit = [&](const DenseLayer& layer) {
    fn(Eigen::Map<const Eigen::VectorXd>(layer.weight.data(), layer.weight.size()));
    fn(Eigen::Map<const Eigen::VectorXd>(layer.bias.data(), layer.bias.size()));
  };
  visit(shared);
  for (const auto& head : heads) {
    for (const auto& layer : head) visit(layer);
  }
}

bool PolicyParams::same_shape(const PolicyParams& other) const {
  auto same = [](const DenseLayer& a, const DenseLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.bias.size() == b.bias.size();
  };
  if (input_width != other.input_width || hidden_width != other.hidden_width) return false;
  if (!same(shared, other.shared)) return false;
  for (std::size_t h = 0; h < heads.size(); ++h) {
    if (heads[h].size() != other.heads[h].size()) return false;
    for (std::size_t l = 0; l < heads[h].size(); ++l) {
      if (!same(heads[h][l], other.heads[h][l])) return false;
    }
  }
  return true;
}

void PolicyParams::add_scaled(const PolicyParams& other, double scale) {
  if (!same_shape(other)) throw ValidationError("parameter shapes differ");
  auto axpy = [scale](DenseLayer& dst, const DenseLayer& src) {
    dst.weight += scale * src.weight;
    dst.bias += scale * src.bias;
  };
  axpy(shared, other.shared);
  for (std::size_t h = 0; h < heads.size(); ++h) {
    for (std::size_t l = 0; l < heads[h].size(); ++l) axpy(heads[h][l], other.heads[h][l]);
  }
}

double PolicyParams::squared_norm() const {
  double total = 0.0;
  for_each_block([&](Eigen::Map<const Eigen::VectorXd> block) { total += block.squaredNorm(); });
  return total;
}

std::size_t PolicyParams::parameter_count() const {
  std::size_t n = 0;
  for_each_block([&](Eigen::Map<const Eigen::VectorXd> block) { n += static_cast<std::size_t>(block.size()); });
  return n;
}

bool PolicyParams::all_finite() const {
  bool finite = true;
  for_each_block([&](Eigen::Map<const Eigen::VectorXd> block) { finite = finite && block.allFinite(); });
  return finite && std::isfinite(input_gain);
}

Eigen::VectorXd PolicyParams::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index offset = 0;
  for_each_block([&](Eigen::Map<const Eigen::VectorXd> block) {
    flat.segment(offset, block.size()) = block;
    offset += block.size();
  });
  return flat;
}

void PolicyParams::unflatten(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw ValidationError("flat parameter vector has the wrong length");
  }
  Eigen::Index offset = 0;
  for_each_block([&](Eigen::Map<Eigen::VectorXd> block) {
    block = flat.segment(offset, block.size());
    offset += block.size();
  });
}

bool operator==(const PolicyParams& a, const PolicyParams& b) {
  if (!a.same_shape(b)) return false;
  // Compare bit patterns so -0.0 != 0.0 and NaN payloads are respected.
  if (std::memcmp(&a.input_gain, &b.input_gain, sizeof(double)) != 0) return false;
  const Eigen::VectorXd fa = a.flatten();
  const Eigen::VectorXd fb = b.flatten();
  return std::memcmp(fa.data(), fb.data(), static_cast<std::size_t>(fa.size()) * sizeof(double)) == 0;
}

PolicyParams init_params(const ActionSpace& space, std::size_t input_width, std::uint64_t seed,
                         const PolicyArchitecture& arch) {
  if (input_width < kMinEmbeddingWidth) {
    throw ValidationError("input width must be at least " + std::to_string(kMinEmbeddingWidth));
  }
  if (arch.hidden_width == 0) throw ValidationError("hidden width must be positive");
  for (auto w : arch.head_interior) {
    if (w == 0) throw ValidationError("head interior widths must be positive");
  }
  if (!(arch.input_gain > 0.0) || !std::isfinite(arch.input_gain)) {
    throw ValidationError("input gain must be positive and finite");
  }
  Rng rng(seed);
  PolicyParams p;
  p.input_width = input_width;
  p.hidden_width = arch.hidden_width;
  p.input_gain = arch.input_gain;
  p.shared = xavier_layer(input_width, arch.hidden_width, rng);
  for (Axis axis : kAxes) {
    std::size_t in = arch.hidden_width;
    auto& layers = p.head(axis);
    for (auto width : arch.head_interior) {
      layers.push_back(xavier_layer(in, width, rng));
      in = width;
    }
    layers.push_back(xavier_layer(in, space.axis_size(axis), rng));
  }
  return p;
}

Eigen::VectorXd tempered_softmax(const Eigen::VectorXd& logits, double tau) {
  check_tau(tau);
  if (logits.size() == 0) throw ValidationError("softmax of an empty vector");
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = ((logits.array() - top) / tau).exp().matrix();
  return e / e.sum();
}

std::size_t argmax_lowest(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw ValidationError("argmax of an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

PolicyOutput forward(const PolicyParams& params, const Embedding& context, double tau) {
  check_tau(tau);
  Trace t = run_forward(params, context);
  PolicyOutput out;
  out.hidden = std::move(t.hidden);
  for (std::size_t h = 0; h < 3; ++h) {
    out.heads[h].probabilities = tempered_softmax(t.heads[h].logits, tau);
    out.heads[h].logits = std::move(t.heads[h].logits);
    out.heads[h].tau = tau;
  }
  return out;
}

PolicyDecision sample(const PolicyParams& params, const Embedding& context, double tau,
                      std::uint64_t rng_seed) {
  check_tau(tau);
  const PolicyOutput out = forward(params, context, tau);
  Rng rng(rng_seed);
  PolicyDecision d;
  for (Axis axis : kAxes) {
    const auto& head = out.head(axis);
    const std::size_t arm = sample_categorical(
        std::span<const double>(head.probabilities.data(), static_cast<std::size_t>(head.probabilities.size())),
        rng);
    d.triple[axis] = arm;
    const Eigen::VectorXd untempered = tempered_softmax(head.logits, 1.0);
    d.logp[static_cast<std::size_t>(axis)] = std::log(untempered[static_cast<Eigen::Index>(arm)]);
  }
  d.hidden = out.hidden;
  return d;
}

ActionTriple greedy(const PolicyParams& params, const Embedding& context) {
  const Trace t = run_forward(params, context);
  ActionTriple triple;
  for (Axis axis : kAxes) {
    triple[axis] = argmax_lowest(t.heads[static_cast<std::size_t>(axis)].logits);
  }
  return triple;
}

double log_prob(const PolicyParams& params, const Embedding& context, const ActionTriple& triple,
                double tau) {
  check_tau(tau);
  const Trace t = run_forward(params, context);
  double total = 0.0;
  for (Axis axis : kAxes) {
    const auto& logits = t.heads[static_cast<std::size_t>(axis)].logits;
    if (triple[axis] >= static_cast<std::size_t>(logits.size())) {
      throw BoundsError(std::string(axis_name(axis)), triple[axis], static_cast<std::size_t>(logits.size()));
    }
    // log softmax via log-sum-exp with max subtraction.
    const Eigen::ArrayXd scaled = logits.array() / tau;
    const double top = scaled.maxCoeff();
    const double lse = top + std::log((scaled - top).exp().sum());
    total += scaled[static_cast<Eigen::Index>(triple[axis])] - lse;
  }
  return total;
}

PolicyGradient grad_log_prob(const PolicyParams& params, const Embedding& context,
                             const ActionTriple& triple, double tau) {
  check_tau(tau);
  const Trace t = run_forward(params, context);
  std::array<Eigen::VectorXd, 3> upstream;
  for (Axis axis : kAxes) {
    const auto h = static_cast<std::size_t>(axis);
    if (triple[axis] >= static_cast<std::size_t>(t.heads[h].logits.size())) {
      throw BoundsError(std::string(axis_name(axis)), triple[axis],
                        static_cast<std::size_t>(t.heads[h].logits.size()));
    }
    upstream[h] = log_softmax_grad(t.heads[h].logits, triple[axis], tau);
  }
  return backward(params, t, upstream);
}

PolicyGradient grad_log_prob_head(const PolicyParams& params, const Embedding& context, Axis axis,
                                  std::size_t arm, double tau) {
  check_tau(tau);
  const Trace t = run_forward(params, context);
  const auto h = static_cast<std::size_t>(axis);
  if (arm >= static_cast<std::size_t>(t.heads[h].logits.size())) {
    throw BoundsError(std::string(axis_name(axis)), arm, static_cast<std::size_t>(t.heads[h].logits.size()));
  }
  std::array<Eigen::VectorXd, 3> upstream;
  upstream[h] = log_softmax_grad(t.heads[h].logits, arm, tau);
  return backward(params, t, upstream);
}

PolicyGradient expected_gradient(const PolicyParams& params, const Embedding& context,
                                 const ActionSpace& space,
                                 const std::function<double(const ActionTriple&)>& weight) {
  const Trace t = run_forward(params, context);
  std::array<Eigen::VectorXd, 3> probs;
  std::array<Eigen::VectorXd, 3> upstream;
  for (std::size_t h = 0; h < 3; ++h) {
    probs[h] = tempered_softmax(t.heads[h].logits, 1.0);
    upstream[h] = Eigen::VectorXd::Zero(probs[h].size());
  }
  // sum_a w(a) pi(a) (e_{a_j} - p_j) for each head j, in logit space.
  for (std::size_t flat = 0; flat < space.joint_size(); ++flat) {
    const ActionTriple a = space.from_flat(flat);
    const double pa = probs[0][static_cast<Eigen::Index>(a.instruction_index)] *
                      probs[1][static_cast<Eigen::Index>(a.temperature_index)] *
                      probs[2][static_cast<Eigen::Index>(a.steps_index)];
    const double coeff = weight(a) * pa;
    if (coeff == 0.0) continue;
    for (Axis axis : kAxes) {
      const auto h = static_cast<std::size_t>(axis);
      upstream[h] -= coeff * probs[h];
      upstream[h][static_cast<Eigen::Index>(a[axis])] += coeff;
    }
  }
  return backward(params, t, upstream);
}

}  // namespace confbandit
