#pragma once

#include <cstdint>
#include <limits>

namespace psd {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` under master seed `seed`. Depends only on the pair,
/// so replicate i of a test is reproducible regardless of execution order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ (index * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: output k is mix64(key + k * gamma). Satisfies
/// UniformRandomBitGenerator, so it works with <random> distributions.
class Engine {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Engine(std::uint64_t key = 0) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    counter_ += kGamma;
    return mix64(key_ + counter_);
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Engine for stream `index` of master seed `seed`.
constexpr Engine make_engine(std::uint64_t seed, std::uint64_t index) noexcept {
  return Engine(derive_seed(seed, index));
}

}  // namespace psd
