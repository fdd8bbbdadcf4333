#include "cibound/verify.hpp"

#include <cmath>
#include <numbers>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"
#include "cibound/random.hpp"

namespace cibound {

namespace {

// Precomputed per-sample losses: row w holds loss(w, sample_j) for all 2n
// samples, so per-mask train/test means are cheap inside the 2^n loop.
std::vector<std::vector<double>> loss_matrix(const DiscreteLearner& learner,
                                             const Supersample& ss) {
  std::vector<std::vector<double>> lm(static_cast<std::size_t>(learner.m));
  for (long w = 0; w < learner.m; ++w) {
    auto& row = lm[static_cast<std::size_t>(w)];
    row.reserve(ss.samples.size());
    for (const Instance& z : ss.samples) {
      const double v = learner.loss(w, z);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidParameter("discrete learner loss outside [0, 1]");
      }
      row.push_back(v);
    }
  }
  return lm;
}

std::pair<double, double> view_losses(const std::vector<double>& row, const Mask& mask,
                                      long n) {
  KahanSum train, test;
  for (long i = 0; i < n; ++i) {
    const auto bi = static_cast<std::size_t>(i);
    const std::size_t sel = bi + (mask.bits[bi] ? static_cast<std::size_t>(n) : 0);
    const std::size_t rest = bi + (mask.bits[bi] ? 0 : static_cast<std::size_t>(n));
    train.add(row[sel]);
    test.add(row[rest]);
  }
  const double dn = static_cast<double>(n);
  return {train.value() / dn, test.value() / dn};
}

using ExactExponent = std::function<double(double train, double test)>;

MomentEstimate exact_moment(const DiscreteLearner& learner, const Supersample& ss,
                            const ExactExponent& exponent, bool require_interpolation) {
  learner.validate();
  ss.validate();
  check_enumeration(ss.n);
  const auto lm = loss_matrix(learner, ss);
  const std::vector<double> q = enumerate_marginal(learner, ss);
  const std::uint64_t count = std::uint64_t{1} << ss.n;
  KahanSum total;
  for (std::uint64_t s = 0; s < count; ++s) {
    const Mask mask = Mask::from_index(ss.n, s);
    const std::vector<double> p = learner.posterior(ss, mask);
    check_distribution(p, learner.m);
    for (std::size_t w = 0; w < p.size(); ++w) {
      if (p[w] <= 0.0) continue;
      const auto [lt, lv] = view_losses(lm[w], mask, ss.n);
      if (require_interpolation && lt > 0.0) {
        throw InterpolationViolation(
            "hypothesis in the posterior support has nonzero training loss");
      }
      // Change of measure against the true marginal: summand q(w)*exp(...).
      total.add(q[w] * std::exp(exponent(lt, lv)));
    }
  }
  MomentEstimate est;
  est.estimate = total.value() / static_cast<double>(count);
  est.std_error = 0.0;
  est.exact = true;
  return est;
}

MomentEstimate mc_from_samples(const std::vector<double>& values) {
  MomentEstimate est;
  est.estimate = mean(values);
  est.std_error = values.size() > 1
                      ? sample_std(values) / std::sqrt(static_cast<double>(values.size()))
                      : 0.0;
  est.exact = false;
  return est;
}

void check_prior_support(const std::vector<double>& p, const std::vector<double>& q) {
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] > 0.0 && !(q[w] > 0.0)) {
      throw InvalidParameter("prior assigns zero mass inside the posterior support");
    }
  }
}

}  // namespace

MomentEstimate exact_moment_fast(const DiscreteLearner& learner, const Supersample& ss,
                                 const BoundParams& params) {
  params.validate();
  if (!is_feasible(params.lambda, params.gamma)) {
    throw InvalidParameter("(lambda, gamma) violates the exponential-inequality condition");
  }
  const double lam_n = params.lambda * static_cast<double>(ss.n);
  const double gamma = params.gamma;
  return exact_moment(
      learner, ss,
      [lam_n, gamma](double lt, double lv) { return lam_n * (lv - gamma * lt); }, false);
}

MomentEstimate exact_moment_slow(const DiscreteLearner& learner, const Supersample& ss) {
  const double dn = static_cast<double>(ss.n);
  return exact_moment(
      learner, ss,
      [dn](double lt, double lv) {
        const double delta = lv - lt;
        return 0.5 * (dn - 1.0) * delta * delta - 0.5 * std::log(dn);
      },
      false);
}

MomentEstimate exact_moment_interp(const DiscreteLearner& learner, const Supersample& ss) {
  const double scale = static_cast<double>(ss.n) * std::numbers::ln2;
  return exact_moment(
      learner, ss, [scale](double, double lv) { return scale * lv; }, true);
}

MomentEstimate mc_moment_fast_discrete(const DiscreteLearner& learner,
                                       const Supersample& ss,
                                       const std::vector<double>& prior,
                                       const BoundParams& params, long trials,
                                       RandomStream& rng) {
  learner.validate();
  ss.validate();
  params.validate();
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  if (!is_feasible(params.lambda, params.gamma)) {
    throw InvalidParameter("(lambda, gamma) violates the exponential-inequality condition");
  }
  check_distribution(prior, learner.m);
  const auto lm = loss_matrix(learner, ss);
  const double lam_n = params.lambda * static_cast<double>(ss.n);
  std::vector<double> values(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) {
    RandomStream trial = rng.child(static_cast<std::uint64_t>(t));
    const Mask mask = Mask::random(ss.n, trial);
    const std::vector<double> p = learner.posterior(ss, mask);
    check_distribution(p, learner.m);
    check_prior_support(p, prior);
    const long w = sample_categorical(p, trial);
    const auto wi = static_cast<std::size_t>(w);
    const auto [lt, lv] = view_losses(lm[wi], mask, ss.n);
    const double log_ratio = std::log(p[wi] / prior[wi]);
    values[static_cast<std::size_t>(t)] =
        std::exp(lam_n * (lv - params.gamma * lt) - log_ratio);
  }
  return mc_from_samples(values);
}

MomentEstimate mc_moment_interp_discrete(const DiscreteLearner& learner,
                                         const Supersample& ss,
                                         const std::vector<double>& prior, long trials,
                                         RandomStream& rng) {
  learner.validate();
  ss.validate();
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  check_distribution(prior, learner.m);
  const auto lm = loss_matrix(learner, ss);
  const double scale = static_cast<double>(ss.n) * std::numbers::ln2;
  std::vector<double> values(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) {
    RandomStream trial = rng.child(static_cast<std::uint64_t>(t));
    const Mask mask = Mask::random(ss.n, trial);
    const std::vector<double> p = learner.posterior(ss, mask);
    check_distribution(p, learner.m);
    check_prior_support(p, prior);
    const long w = sample_categorical(p, trial);
    const auto wi = static_cast<std::size_t>(w);
    const auto [lt, lv] = view_losses(lm[wi], mask, ss.n);
    if (lt > 0.0) {
      throw InterpolationViolation("sampled hypothesis has nonzero training loss");
    }
    values[static_cast<std::size_t>(t)] = std::exp(scale * lv - std::log(p[wi] / prior[wi]));
  }
  return mc_from_samples(values);
}

void GaussianScenario::validate() const {
  if (n < 1) throw InvalidParameter("scenario needs n >= 1");
  if (!draw_supersample || !posterior || !prior || !loss) {
    throw InvalidParameter("scenario is missing a component");
  }
}

namespace {

using GaussianExponent = std::function<double(double train, double test, double log_ratio)>;

MomentEstimate mc_moment_gaussian(const GaussianScenario& scenario,
                                  const GaussianExponent& exponent, long trials,
                                  RandomStream& rng) {
  scenario.validate();
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) {
    RandomStream trial = rng.child(static_cast<std::uint64_t>(t));
    const Supersample ss = scenario.draw_supersample(trial);
    ss.validate();
    const Mask mask = Mask::random(ss.n, trial);
    const IsotropicGaussian post = scenario.posterior(ss, mask);
    const IsotropicGaussian pri = scenario.prior(ss);
    const std::vector<double> w = sample(post, trial);
    const InstanceLoss inst_loss = [&](const Instance& z) { return scenario.loss(w, z); };
    const double lt = train_loss(ss, mask, inst_loss);
    const double lv = test_loss(ss, mask, inst_loss);
    const double log_ratio = log_density_ratio(post, pri, w);
    values[static_cast<std::size_t>(t)] = std::exp(exponent(lt, lv, log_ratio));
  }
  return mc_from_samples(values);
}

}  // namespace

MomentEstimate mc_moment_fast_gaussian(const GaussianScenario& scenario,
                                       const BoundParams& params, long trials,
                                       RandomStream& rng) {
  params.validate();
  if (!is_feasible(params.lambda, params.gamma)) {
    throw InvalidParameter("(lambda, gamma) violates the exponential-inequality condition");
  }
  const double lam_n = params.lambda * static_cast<double>(scenario.n);
  const double gamma = params.gamma;
  return mc_moment_gaussian(
      scenario,
      [lam_n, gamma](double lt, double lv, double lr) {
        return lam_n * (lv - gamma * lt) - lr;
      },
      trials, rng);
}

MomentEstimate mc_moment_slow_gaussian(const GaussianScenario& scenario, long trials,
                                       RandomStream& rng) {
  const double dn = static_cast<double>(scenario.n);
  return mc_moment_gaussian(
      scenario,
      [dn](double lt, double lv, double lr) {
        const double delta = lv - lt;
        return 0.5 * (dn - 1.0) * delta * delta - 0.5 * std::log(dn) - lr;
      },
      trials, rng);
}

double tail_coverage(const std::function<TailTrial(RandomStream&)>& sampler, long trials,
                     RandomStream& rng) {
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  long violations = 0;
  for (long t = 0; t < trials; ++t) {
    RandomStream trial = rng.child(static_cast<std::uint64_t>(t));
    const TailTrial result = sampler(trial);
    if (result.loss > result.bound) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(trials);
}

double tail_slack(double delta, long trials) {
  if (delta < 0.0 || delta > 1.0) throw InvalidParameter("delta must lie in [0, 1]");
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  return 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
}

long sample_categorical(const std::vector<double>& p, RandomStream& rng) {
  if (p.empty()) throw InvalidParameter("empty probability vector");
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t w = 0; w < p.size(); ++w) {
    cum += p[w];
    if (u < cum) return static_cast<long>(w);
  }
  return static_cast<long>(p.size()) - 1;  // guard against round-off at u ~ 1
}

}  // namespace cibound
