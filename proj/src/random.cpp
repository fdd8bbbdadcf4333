#include "cibound/random.hpp"

#include <cmath>
#include <numbers>

#include "cibound/errors.hpp"

namespace cibound {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ull + b));
}

RandomStream::RandomStream(std::uint64_t key) : key_(key), engine_(splitmix64(key)) {}

RandomStream RandomStream::child(std::uint64_t tag) const {
  return RandomStream(mix_key(key_, tag));
}

std::uint64_t RandomStream::bits() { return engine_(); }

double RandomStream::uniform() {
  // 53 random bits, offset by half an ulp so the result is never 0 or 1.
  return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidParameter("RandomStream::below: bound must be positive");
  if ((bound & (bound - 1)) == 0) return bits() & (bound - 1);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = bits();
  } while (x >= limit);
  return x % bound;
}

double RandomStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool RandomStream::bernoulli(double p) { return uniform() < p; }

}  // namespace cibound
