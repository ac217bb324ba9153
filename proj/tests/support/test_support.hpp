#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "confbandit/config_space.hpp"
#include "confbandit/embedder.hpp"
#include "confbandit/environment.hpp"
#include "confbandit/policy_net.hpp"
#include "confbandit/seeding.hpp"
#include "confbandit/trainer.hpp"

namespace confbandit::testing {

/// |A_p| x |A_t| x |A_s| space built from the default instruction texts.
/// Instruction count must be <= 100; it is made of one base and
/// `instructions` variations when <= 10, else of full base rows.
inline ActionSpace small_space(std::size_t instructions, std::size_t temperatures, std::size_t steps) {
  const ActionSpace full = build_default_space();
  std::vector<int> steps_values;
  for (std::size_t i = 0; i < steps; ++i) steps_values.push_back(3 + static_cast<int>(i * 7 / std::max<std::size_t>(1, steps - 1)));
  if (steps == 1) steps_values = {3};
  std::vector<double> temps;
  for (std::size_t i = 0; i < temperatures; ++i) {
    temps.push_back(temperatures == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(temperatures - 1));
  }
  std::vector<std::string> bases;
  std::vector<std::string> variations;
  if (instructions <= 10) {
    bases = {full.base_instructions()[0]};
    variations.assign(full.variation_instructions().begin(),
                      full.variation_instructions().begin() + static_cast<std::ptrdiff_t>(instructions));
  } else {
    bases.assign(full.base_instructions().begin(),
                 full.base_instructions().begin() + static_cast<std::ptrdiff_t>(instructions / 10));
    variations = full.variation_instructions();
  }
  return ActionSpace(steps_values, temps, bases, variations);
}

/// Random unit-norm context of the given width.
inline Embedding random_context(std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(width);
  for (auto& x : v) x = standard_normal(rng);
  return make_embedding(std::move(v), EmbeddingSource::hashed);
}

/// Uniformly random triple of a space.
inline ActionTriple random_triple(const ActionSpace& space, Rng& rng) {
  ActionTriple t;
  for (Axis axis : kAxes) {
    t[axis] = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(space.axis_size(axis)));
  }
  return t;
}

/// Adds a small random offset to every bias so ReLU units are not exactly
/// at zero and gradients touch every block.
inline void jitter_biases(PolicyParams& p, double scale, std::uint64_t seed) {
  Rng rng(seed);
  auto jitter = [&](DenseLayer& layer) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] += scale * standard_normal(rng);
  };
  jitter(p.shared);
  for (auto& head : p.heads) {
    for (auto& layer : head) jitter(layer);
  }
}

/// Environment that pays a fixed reward.
class ConstantEnvironment final : public Environment {
 public:
  explicit ConstantEnvironment(double reward) : reward_(reward) {}
  RewardOutcome reward(const QAPair&, const ActionTriple&, std::uint64_t) override {
    ++calls;
    return RewardOutcome{reward_, std::nullopt, 0, RewardSource::sim};
  }
  std::size_t calls = 0;

 private:
  double reward_;
};

inline std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("confbandit-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// --- Reference implementation of the policy, written with plain loops ----
// Independent of the Eigen code paths; used as the finite-difference oracle.

struct ReferenceTrace {
  std::vector<double> preactivations;  // every ReLU input, for kink checks
  double log_prob = 0.0;
};

inline std::vector<double> dense(const DenseLayer& layer, const std::vector<double>& x) {
  std::vector<double> y(layer.outputs());
  for (std::size_t r = 0; r < layer.outputs(); ++r) {
    double s = layer.bias[static_cast<Eigen::Index>(r)];
    for (std::size_t c = 0; c < layer.inputs(); ++c) {
      s += layer.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * x[c];
    }
    y[r] = s;
  }
  return y;
}

inline ReferenceTrace reference_log_prob(const PolicyParams& p, const Embedding& ctx, const ActionTriple& a,
                                         double tau = 1.0) {
  ReferenceTrace t;
  std::vector<double> x(ctx.width());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = p.input_gain * ctx.values[static_cast<Eigen::Index>(i)];
  std::vector<double> h = dense(p.shared, x);
  for (auto& v : h) v = std::tanh(v);
  for (Axis axis : kAxes) {
    std::vector<double> z = h;
    const auto& layers = p.head(axis);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      z = dense(layers[l], z);
      if (l + 1 < layers.size()) {
        for (auto& v : z) {
          t.preactivations.push_back(v);
          v = std::max(v, 0.0);
        }
      }
    }
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double norm = 0.0;
    for (double v : z) norm += std::exp((v - m) / tau);
    t.log_prob += (z[a[axis]] - m) / tau - std::log(norm);
  }
  return t;
}

}  // namespace confbandit::testing
