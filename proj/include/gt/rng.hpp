#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gt {

// Counter-based splittable RNG.  Every stream is fully determined by
// (master_seed, trial_index, label, a, b), so independent trials and
// independent stages never share state and results do not depend on
// scheduling or thread count.
//
// The generator itself is splitmix64 over a mixed 64-bit key; uniform
// doubles use the top 53 bits.  All paths avoid <random> distributions,
// which are not bit-reproducible across standard library implementations.

namespace detail {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t trial = 0;
};

class Rng {
 public:
  Rng(StreamKey key, std::string_view label, std::uint64_t a = 0,
      std::uint64_t b = 0) {
    using detail::mix64;
    std::uint64_t s = mix64(key.master_seed + detail::kGamma);
    s = mix64(s ^ (key.trial + detail::kGamma));
    s = mix64(s ^ detail::fnv1a(label));
    s = mix64(s ^ (a + detail::kGamma));
    state_ = mix64(s ^ (b + detail::kGamma));
  }

  std::uint64_t next_u64() {
    state_ += detail::kGamma;
    return detail::mix64(state_);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be > 0");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

// Factory for per-index substreams of one labeled stream.  Row-keyed and
// (item, repetition)-keyed draws keep earlier draws identical when a stage
// budget grows, which the budget-monotonicity tests rely on.
class SubstreamSource {
 public:
  SubstreamSource(StreamKey key, std::string label)
      : key_(key), label_(std::move(label)) {}

  Rng at(std::uint64_t a, std::uint64_t b = 0) const {
    return Rng(key_, label_, a, b);
  }

  Rng whole() const { return Rng(key_, label_); }

 private:
  StreamKey key_;
  std::string label_;
};

}  // namespace gt
