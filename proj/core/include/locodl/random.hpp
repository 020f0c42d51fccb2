#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace locodl {

/// Mixes a 64-bit state (SplitMix64 finalizer); used to derive independent seeds.
std::uint64_t mix64(std::uint64_t value) noexcept;

/// Derives a child seed from a master seed and a path of integer tags.
/// The result depends only on the values, never on call order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Tags for the top-level streams of one experiment run.
namespace stream_tag {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t coin = 2;
inline constexpr std::uint64_t client = 3;
inline constexpr std::uint64_t participation = 4;
inline constexpr std::uint64_t probe = 5;
}  // namespace stream_tag

/// A seeded random stream with platform-independent uniform and integer draws.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. uniform() and below() are implemented here rather than via
/// std::uniform_*_distribution so results do not vary across standard
/// libraries.
class RandomStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal draw (libstdc++ algorithm; deterministic per toolchain).
  double normal();

  /// Gamma(shape, 1) draw (libstdc++ algorithm; deterministic per toolchain).
  double gamma(double shape);

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace locodl
