#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cibound/subset.hpp"

namespace cibound {

// A randomized learner over a finite hypothesis set {0, ..., m-1}. The
// posterior maps (supersample, mask) to a probability vector over the m
// hypotheses; the loss evaluates hypothesis w on one instance, in [0, 1].
// Exact enumeration over all 2^n masks is possible whenever n is small.
struct DiscreteLearner {
  long m = 0;
  std::function<std::vector<double>(const Supersample&, const Mask&)> posterior;
  std::function<double(long w, const Instance&)> loss;

  void validate() const;
};

// Guard for 2^n enumeration; larger n must use Monte Carlo instead.
inline constexpr long kMaxEnumerationN = 20;

// Throws EnumerationLimit when 2^n masks is intractable.
void check_enumeration(long n);

// Validates a posterior vector: length m, entries >= 0, sum within 1e-12 of 1.
void check_distribution(const std::vector<double>& p, long m);

// Exact marginal over hypotheses: 2^-n * sum over all masks of the
// posterior at that mask.
std::vector<double> enumerate_marginal(const DiscreteLearner& learner,
                                       const Supersample& ss);

// Exact disintegrated conditional mutual information at this supersample,
// in nats: the mask-average of KL(posterior || marginal).
double exact_cmi(const DiscreteLearner& learner, const Supersample& ss);

// Samplewise version: entry i is the information between the hypothesis
// and mask bit i alone (all other bits marginalized out), in nats.
std::vector<double> exact_samplewise_cmi_all(const DiscreteLearner& learner,
                                             const Supersample& ss);
double exact_samplewise_cmi(const DiscreteLearner& learner, const Supersample& ss,
                            long i);

}  // namespace cibound
