#pragma once

#include <cstdint>
#include <random>

namespace cibound {

/// Mixes two 64-bit values into a well-scrambled key (splitmix64 finalizer).
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b);

/// Deterministic splittable random stream.
///
/// Child streams are derived from the parent's key, never from its consumed
/// state, so the draw order in one stream cannot affect any other. This is
/// what makes parallel reductions seed-deterministic regardless of worker
/// count: every work unit owns a stream keyed by (master seed, unit index).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key);

  /// Independent stream keyed by (this stream's key, tag).
  RandomStream child(std::uint64_t tag) const;

  std::uint64_t key() const { return key_; }

  /// 64 random bits.
  std::uint64_t bits();

  /// Uniform draw in the open interval (0, 1).
  double uniform();

  /// Uniform integer in [0, bound), bound >= 1. Rejection sampling, so the
  /// result is unbiased and independent of the platform's distribution
  /// implementations.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal draw (Box-Muller, one value per two uniforms).
  double normal();

  bool bernoulli(double p = 0.5);

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace cibound
