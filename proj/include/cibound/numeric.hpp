#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace cibound {

/// Kahan compensated accumulator. Keeps sums of ~1e6 terms accurate to the
/// last few ulps, which matters when information measures are compared at
/// seven significant digits.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }

  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

/// Sample standard deviation (n-1 denominator). Zero for fewer than two
/// entries by convention.
inline double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  KahanSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(xs.size() - 1));
}

}  // namespace cibound
