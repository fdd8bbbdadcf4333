#include "cibound/data.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "cibound/errors.hpp"
#include "cibound/random.hpp"

namespace cibound {

void Dataset::validate() const {
  if (num_classes < 2) throw InvalidParameter("dataset needs at least 2 classes");
  for (const Instance& it : items) {
    if (it.label < 0 || it.label >= num_classes) {
      throw InvalidParameter("dataset label out of range");
    }
    for (double v : it.x) {
      if (!std::isfinite(v)) throw InvalidParameter("dataset feature not finite");
    }
  }
}

void SynthSpec::validate() const {
  if (count < 0) throw InvalidParameter("synth count must be >= 0");
  if (dim < 1) throw InvalidParameter("synth dim must be >= 1");
  if (separation < 0.0 || !std::isfinite(separation)) {
    throw InvalidParameter("synth separation must be >= 0");
  }
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidParameter("synth noise_sigma must be positive");
  }
}

Dataset synth_dataset(const SynthSpec& spec, RandomStream& rng) {
  spec.validate();
  Dataset out;
  out.num_classes = 2;
  out.items.reserve(static_cast<std::size_t>(spec.count));
  const double half = spec.separation / 2.0;
  for (long i = 0; i < spec.count; ++i) {
    Instance it;
    it.label = rng.bernoulli() ? 1 : 0;
    it.x.resize(static_cast<std::size_t>(spec.dim));
    const double center = it.label == 1 ? half : -half;
    for (int d = 0; d < spec.dim; ++d) {
      it.x[static_cast<std::size_t>(d)] =
          (d == 0 ? center : 0.0) + spec.noise_sigma * rng.normal();
    }
    out.items.push_back(std::move(it));
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double synth_bayes_error(const SynthSpec& spec) {
  spec.validate();
  return normal_cdf(-spec.separation / (2.0 * spec.noise_sigma));
}

Dataset randomize_labels(const Dataset& data, double fraction, int num_classes,
                         RandomStream& rng) {
  if (fraction < 0.0 || fraction > 1.0 || !std::isfinite(fraction)) {
    throw InvalidParameter("fraction must lie in [0, 1]");
  }
  if (num_classes < 2) throw InvalidParameter("num_classes must be >= 2");
  Dataset out = data;
  const std::size_t total = out.items.size();
  const auto hits = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(total)));

  // Partial Fisher-Yates: the first `hits` entries of `order` are a uniform
  // draw without replacement.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < hits; ++i) {
    const std::size_t j = i + rng.below(total - i);
    std::swap(order[i], order[j]);
    out.items[order[i]].label =
        static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes)));
  }
  return out;
}

Dataset binarize_labels(const Dataset& data) {
  if (data.num_classes == 2) return data;
  Dataset out = data;
  out.num_classes = 2;
  for (Instance& it : out.items) {
    it.label = it.label <= 4 ? 0 : 1;
  }
  return out;
}

}  // namespace cibound
