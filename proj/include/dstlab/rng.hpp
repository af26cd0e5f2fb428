#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace dstlab {

// Keeping the distribution code in-house (rather than <random>'s
// implementation-defined distributions) pins every sampled value to the
// engine's portable output stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  void reseed(std::uint64_t seed) { engine_.seed(seed); }

  /// Uniform draw in [0, 1) with 53 bits of entropy.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; two uniforms per draw, no cached state.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t integer(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % n;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[integer(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derive an independent seed from a root seed and a stream label.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return detail::splitmix64(root ^ detail::fnv1a(label));
}

/// Named family of independent RNG streams sharing one root seed.
///
/// Components draw from their own stream (e.g. "dropout.h_pseudo",
/// "augment.unlabeled_strong"), so toggling one consumer never perturbs the
/// draws seen by another. This is what makes per-step trajectory comparisons
/// between algorithms exact.
class RngPool {
 public:
  explicit RngPool(std::uint64_t root) : root_(root) {}

  Rng& stream(std::string_view label) {
    auto it = streams_.find(std::string(label));
    if (it == streams_.end()) {
      it = streams_
               .emplace(std::string(label), Rng(derive_seed(root_, label)))
               .first;
    }
    return it->second;
  }

  std::uint64_t root() const { return root_; }

 private:
  std::uint64_t root_;
  std::map<std::string, Rng, std::less<>> streams_;
};

}  // namespace dstlab
