#pragma once

#include <cstdint>
#include <vector>

namespace cibound {

class RandomStream;

// One labelled sample: feature vector plus class index.
struct Instance {
  std::vector<double> x;
  int label = 0;
};

struct Dataset {
  std::vector<Instance> items;
  int num_classes = 2;

  std::size_t size() const { return items.size(); }
  void validate() const;
};

// Two-class isotropic Gaussian blobs in R^dim with class means at
// +/- (separation/2) along the first axis and shared noise level
// noise_sigma. Labels are iid Bernoulli(1/2), matching the population
// model whose Bayes error has the closed form below.
struct SynthSpec {
  long count = 0;
  int dim = 2;
  double separation = 2.0;
  double noise_sigma = 1.0;

  void validate() const;
};

Dataset synth_dataset(const SynthSpec& spec, RandomStream& rng);

// Bayes error of the blob distribution: Phi(-separation / (2 * noise_sigma)).
double synth_bayes_error(const SynthSpec& spec);

// Standard normal CDF.
double normal_cdf(double x);

// Resamples the labels of exactly round(fraction * N) positions uniformly
// over {0, ..., num_classes-1}. Positions are a seed-deterministic uniform
// draw without replacement; rounding is to nearest (half away from zero).
Dataset randomize_labels(const Dataset& data, double fraction, int num_classes,
                         RandomStream& rng);

// Collapses labels to two classes: 0 for original labels 0..4, 1 otherwise.
// Datasets that are already two-class pass through unchanged, which makes
// the operation idempotent.
Dataset binarize_labels(const Dataset& data);

}  // namespace cibound
