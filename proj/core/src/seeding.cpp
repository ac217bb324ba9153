#include "confbandit/seeding.hpp"

#include <cmath>
#include <numbers>

#include "confbandit/errors.hpp"

namespace confbandit {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index) noexcept {
  // FNV-1a over the stream name, then mixed with root and index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(root ^ h) + index);
}

double unit_uniform(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_categorical(std::span<const double> probabilities, Rng& rng) {
  if (probabilities.empty()) throw ValidationError("cannot sample from an empty distribution");
  double total = 0.0;
  for (double p : probabilities) total += p;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ValidationError("distribution mass must be positive and finite");
  }
  const double u = unit_uniform(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  // Rounding left u at or above the accumulated mass; take the last arm with mass.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

double standard_normal(Rng& rng) noexcept {
  double u1 = unit_uniform(rng);
  while (u1 <= 0.0) u1 = unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace confbandit
