#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cibound/data.hpp"

namespace cibound {

class RandomStream;

// n Bernoulli(1/2) selector bits. Bit i chooses which of the two candidate
// samples at position i enters the training set.
struct Mask {
  std::vector<std::uint8_t> bits;

  long n() const { return static_cast<long>(bits.size()); }
  Mask complement() const;

  // Bit i is the ith binary digit of `index` (little-endian), so indices
  // 0 .. 2^n - 1 enumerate all masks.
  static Mask from_index(long n, std::uint64_t index);
  std::uint64_t to_index() const;

  static Mask random(long n, RandomStream& rng);
};

// The 2n available samples. The training view selected by mask bits b picks,
// for each i in 0..n-1, the sample at storage index i + b[i]*n; this is the
// single place where the 1-based selection rule of the write-up is mapped to
// 0-based storage.
struct Supersample {
  std::vector<Instance> samples;
  long n = 0;

  void validate() const;  // throws unless samples.size() == 2n, n >= 1
};

// Build a supersample from the first 2n items of a dataset.
Supersample supersample_from(const Dataset& data, long n);

// Storage indices of the training view (or of the test view, via
// mask.complement()). Element i is i + bits[i]*n.
std::vector<std::size_t> select_indices(const Supersample& ss, const Mask& mask);

// Per-instance loss of a fixed hypothesis; must return values in [0, 1].
using InstanceLoss = std::function<double(const Instance&)>;

// Arithmetic mean of loss over the given storage indices. Debug builds
// assert every per-sample value lies in [0, 1].
double average_loss(const Supersample& ss, std::span<const std::size_t> indices,
                    const InstanceLoss& loss);

double train_loss(const Supersample& ss, const Mask& mask, const InstanceLoss& loss);
double test_loss(const Supersample& ss, const Mask& mask, const InstanceLoss& loss);

// Copies of the samples at the given storage indices, in order.
std::vector<Instance> gather(const Supersample& ss, std::span<const std::size_t> indices);

}  // namespace cibound
