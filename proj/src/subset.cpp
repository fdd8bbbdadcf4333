#include "cibound/subset.hpp"

#include <cassert>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"
#include "cibound/random.hpp"

namespace cibound {

Mask Mask::complement() const {
  Mask out;
  out.bits.reserve(bits.size());
  for (std::uint8_t b : bits) out.bits.push_back(b ? 0 : 1);
  return out;
}

Mask Mask::from_index(long n, std::uint64_t index) {
  if (n < 1 || n > 63) throw InvalidParameter("mask length must be in [1, 63]");
  if (n < 64 && index >> n) throw InvalidParameter("mask index out of range");
  Mask out;
  out.bits.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    out.bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((index >> i) & 1u);
  }
  return out;
}

std::uint64_t Mask::to_index() const {
  if (bits.size() > 63) throw InvalidParameter("mask too long to index");
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) idx |= std::uint64_t{1} << i;
  }
  return idx;
}

Mask Mask::random(long n, RandomStream& rng) {
  if (n < 1) throw InvalidParameter("mask length must be >= 1");
  Mask out;
  out.bits.resize(static_cast<std::size_t>(n));
  for (auto& b : out.bits) b = rng.bernoulli() ? 1 : 0;
  return out;
}

void Supersample::validate() const {
  if (n < 1) throw InvalidParameter("supersample needs n >= 1");
  if (samples.size() != static_cast<std::size_t>(2 * n)) {
    throw InvalidParameter("supersample must hold exactly 2n samples");
  }
}

Supersample supersample_from(const Dataset& data, long n) {
  if (n < 1) throw InvalidParameter("supersample needs n >= 1");
  if (data.items.size() < static_cast<std::size_t>(2 * n)) {
    throw InvalidParameter("dataset too small for requested supersample");
  }
  Supersample ss;
  ss.n = n;
  ss.samples.assign(data.items.begin(), data.items.begin() + 2 * n);
  return ss;
}

std::vector<std::size_t> select_indices(const Supersample& ss, const Mask& mask) {
  ss.validate();
  if (mask.n() != ss.n) throw InvalidParameter("mask length does not match supersample");
  std::vector<std::size_t> idx(static_cast<std::size_t>(ss.n));
  for (long i = 0; i < ss.n; ++i) {
    idx[static_cast<std::size_t>(i)] =
        static_cast<std::size_t>(i) +
        (mask.bits[static_cast<std::size_t>(i)] ? static_cast<std::size_t>(ss.n) : 0);
  }
  return idx;
}

double average_loss(const Supersample& ss, std::span<const std::size_t> indices,
                    const InstanceLoss& loss) {
  if (indices.empty()) throw InvalidParameter("average_loss over empty index set");
  KahanSum sum;
  for (std::size_t i : indices) {
    const double v = loss(ss.samples.at(i));
    assert(v >= 0.0 && v <= 1.0 && "per-sample loss out of [0, 1]");
    sum.add(v);
  }
  return sum.value() / static_cast<double>(indices.size());
}

double train_loss(const Supersample& ss, const Mask& mask, const InstanceLoss& loss) {
  const auto idx = select_indices(ss, mask);
  return average_loss(ss, idx, loss);
}

double test_loss(const Supersample& ss, const Mask& mask, const InstanceLoss& loss) {
  return train_loss(ss, mask.complement(), loss);
}

std::vector<Instance> gather(const Supersample& ss, std::span<const std::size_t> indices) {
  std::vector<Instance> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(ss.samples.at(i));
  return out;
}

}  // namespace cibound
