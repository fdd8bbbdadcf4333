#pragma once

#include <functional>
#include <vector>

#include "cibound/bounds.hpp"
#include "cibound/discrete.hpp"
#include "cibound/verify.hpp"

namespace cibound::toys {

// Threshold classifiers on 1-D data: hypothesis w predicts class 1 iff
// x >= thetas[w]. Data are Gaussian class conditionals N(+1, 1) / N(-1, 1)
// with equal priors. The posterior is a softmax in the training loss,
// p(w) proportional to exp(-beta * n * train_loss(w)), so every hypothesis
// keeps positive mass and change-of-measure arguments apply cleanly.
struct ThresholdToy {
  std::vector<double> thetas{-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
  double beta = 1.5;

  DiscreteLearner learner() const;
  Supersample draw(long n, RandomStream& rng) const;
};

// Instances carry a value in {0, 1, 2}; the 8 hypotheses are the subsets
// of {0, 1, 2}, with loss 0 exactly on values inside the subset. The
// learner returns a point mass on the union of training values (the
// minimal consistent subset), so it interpolates by construction.
struct SubsetMemorizerToy {
  DiscreteLearner learner() const;
  Supersample draw(long n, RandomStream& rng) const;
};

// The maximal-information learner: 2^n hypotheses, one per mask, over
// index-encoded samples (feature = own position in the supersample). The
// chosen hypothesis encodes the mask itself, giving training loss 0, test
// loss 1, and information equal to the n log 2 ceiling.
DiscreteLearner mask_memorizer(long n);
Supersample index_supersample(long n);

// Posterior that ignores the data entirely.
DiscreteLearner constant_learner(std::vector<double> probs,
                                 std::function<double(long, const Instance&)> loss);

// One tail-coverage trial for the fast-rate PAC-Bayesian bound on the
// threshold toy: fresh supersample and mask, information term
// KL(posterior || enumerated marginal), bound compared against the
// posterior-averaged test loss. params.n must equal n.
std::function<TailTrial(RandomStream&)> fast_tail_sampler(ThresholdToy toy, long n,
                                                          BoundParams params);

// Same for the interpolating PAC-Bayesian bound on the subset memorizer.
std::function<TailTrial(RandomStream&)> interp_tail_sampler(long n, double delta);

}  // namespace cibound::toys
