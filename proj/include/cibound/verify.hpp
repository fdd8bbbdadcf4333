#pragma once

#include <functional>
#include <vector>

#include "cibound/bounds.hpp"
#include "cibound/discrete.hpp"
#include "cibound/gaussian.hpp"
#include "cibound/subset.hpp"

namespace cibound {

class RandomStream;

// Estimate of an exponential moment that the theory promises is <= 1.
// Exact estimates come from full enumeration (std_error 0); Monte Carlo
// estimates carry the standard error of the mean.
struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool exact = false;

  // The acceptance rule: exact values must be <= 1 up to round-off, MC
  // values up to `slack_ses` standard errors.
  bool holds(double slack_ses = 3.0) const {
    return estimate <= 1.0 + (exact ? 1e-9 : slack_ses * std_error);
  }
};

// ---- Exact enumeration over all 2^n masks, prior = true marginal ----
//
// Each computes E over (S, W ~ posterior) of exp(exponent - log(p/q)) with
// q the enumerated marginal; the change of measure turns the summand into
// q(w) * exp(exponent), so hypotheses outside the posterior support are
// included harmlessly and division by p never occurs.

// exponent = lambda * n * (test_loss - gamma * train_loss)
MomentEstimate exact_moment_fast(const DiscreteLearner& learner, const Supersample& ss,
                                 const BoundParams& params);

// exponent = (n-1)/2 * (test_loss - train_loss)^2 - log(sqrt(n))
MomentEstimate exact_moment_slow(const DiscreteLearner& learner, const Supersample& ss);

// exponent = n * log(2) * test_loss; requires train_loss == 0 for every
// hypothesis in the posterior support of every mask, else throws
// InterpolationViolation.
MomentEstimate exact_moment_interp(const DiscreteLearner& learner, const Supersample& ss);

// ---- Monte Carlo over draws of (S, W), fixed supersample, explicit prior ----

MomentEstimate mc_moment_fast_discrete(const DiscreteLearner& learner,
                                       const Supersample& ss,
                                       const std::vector<double>& prior,
                                       const BoundParams& params, long trials,
                                       RandomStream& rng);

MomentEstimate mc_moment_interp_discrete(const DiscreteLearner& learner,
                                         const Supersample& ss,
                                         const std::vector<double>& prior, long trials,
                                         RandomStream& rng);

// ---- Monte Carlo over draws of (supersample, S, W) with Gaussian weights ----

// A data distribution plus Gaussian posterior/prior constructors and a
// weight-space loss; everything the Monte Carlo verifiers need to draw one
// (supersample, mask, weights) instance.
struct GaussianScenario {
  long n = 0;
  std::function<Supersample(RandomStream&)> draw_supersample;
  std::function<IsotropicGaussian(const Supersample&, const Mask&)> posterior;
  std::function<IsotropicGaussian(const Supersample&)> prior;
  std::function<double(const std::vector<double>& w, const Instance&)> loss;

  void validate() const;
};

MomentEstimate mc_moment_fast_gaussian(const GaussianScenario& scenario,
                                       const BoundParams& params, long trials,
                                       RandomStream& rng);

MomentEstimate mc_moment_slow_gaussian(const GaussianScenario& scenario, long trials,
                                       RandomStream& rng);

// ---- Tail coverage ----

// One independent experiment: a computed bound and the realized loss it
// was supposed to dominate.
struct TailTrial {
  double bound = 0.0;
  double loss = 0.0;
};

// Fraction of trials in which the realized loss exceeds its bound. Each
// trial gets an independent child stream, so the result does not depend on
// evaluation order.
double tail_coverage(const std::function<TailTrial(RandomStream&)>& sampler, long trials,
                     RandomStream& rng);

// Acceptance slack for an empirical rate at confidence delta:
// 3 * sqrt(delta * (1 - delta) / trials).
double tail_slack(double delta, long trials);

// Categorical draw from a probability vector.
long sample_categorical(const std::vector<double>& p, RandomStream& rng);

}  // namespace cibound
