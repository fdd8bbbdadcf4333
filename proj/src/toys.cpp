#include "cibound/toys.hpp"

#include <algorithm>
#include <cmath>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"
#include "cibound/random.hpp"

namespace cibound::toys {

namespace {

double posterior_average(const std::vector<double>& p,
                         const std::function<double(long)>& value) {
  KahanSum s;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] > 0.0) s.add(p[w] * value(static_cast<long>(w)));
  }
  return s.value();
}

double kl_discrete(const std::vector<double>& p, const std::vector<double>& q) {
  KahanSum s;
  for (std::size_t w = 0; w < p.size(); ++w) {
    if (p[w] > 0.0) {
      if (!(q[w] > 0.0)) throw InvalidParameter("KL undefined: q vanishes on support of p");
      s.add(p[w] * std::log(p[w] / q[w]));
    }
  }
  return s.value() < 0.0 ? 0.0 : s.value();
}

}  // namespace

DiscreteLearner ThresholdToy::learner() const {
  if (thetas.empty()) throw InvalidParameter("threshold toy needs at least one threshold");
  DiscreteLearner dl;
  dl.m = static_cast<long>(thetas.size());
  const std::vector<double> th = thetas;
  dl.loss = [th](long w, const Instance& z) {
    const bool predict_one = z.x.at(0) >= th.at(static_cast<std::size_t>(w));
    return predict_one == (z.label == 1) ? 0.0 : 1.0;
  };
  const double b = beta;
  auto loss_copy = dl.loss;
  dl.posterior = [th, b, loss_copy](const Supersample& ss, const Mask& mask) {
    const auto idx = select_indices(ss, mask);
    std::vector<double> energy(th.size());
    for (std::size_t w = 0; w < th.size(); ++w) {
      KahanSum s;
      for (std::size_t i : idx) s.add(loss_copy(static_cast<long>(w), ss.samples[i]));
      energy[w] = -b * s.value();  // -beta * n * train_loss
    }
    const double peak = *std::max_element(energy.begin(), energy.end());
    std::vector<double> p(th.size());
    KahanSum norm;
    for (std::size_t w = 0; w < p.size(); ++w) {
      p[w] = std::exp(energy[w] - peak);
      norm.add(p[w]);
    }
    for (double& v : p) v /= norm.value();
    return p;
  };
  return dl;
}

Supersample ThresholdToy::draw(long n, RandomStream& rng) const {
  Supersample ss;
  ss.n = n;
  ss.samples.resize(static_cast<std::size_t>(2 * n));
  for (auto& z : ss.samples) {
    z.label = rng.bernoulli() ? 1 : 0;
    z.x = {(z.label == 1 ? 1.0 : -1.0) + rng.normal()};
  }
  ss.validate();
  return ss;
}

DiscreteLearner SubsetMemorizerToy::learner() const {
  DiscreteLearner dl;
  dl.m = 8;
  dl.loss = [](long w, const Instance& z) {
    const auto value = static_cast<long>(std::lround(z.x.at(0)));
    if (value < 0 || value > 2) throw InvalidParameter("subset toy expects values in {0,1,2}");
    return ((w >> value) & 1) ? 0.0 : 1.0;
  };
  dl.posterior = [](const Supersample& ss, const Mask& mask) {
    long subset = 0;
    for (std::size_t i : select_indices(ss, mask)) {
      subset |= 1L << static_cast<long>(std::lround(ss.samples[i].x.at(0)));
    }
    std::vector<double> p(8, 0.0);
    p[static_cast<std::size_t>(subset)] = 1.0;
    return p;
  };
  return dl;
}

Supersample SubsetMemorizerToy::draw(long n, RandomStream& rng) const {
  Supersample ss;
  ss.n = n;
  ss.samples.resize(static_cast<std::size_t>(2 * n));
  for (auto& z : ss.samples) {
    const auto value = static_cast<int>(rng.below(3));
    z.x = {static_cast<double>(value)};
    z.label = value;
  }
  ss.validate();
  return ss;
}

DiscreteLearner mask_memorizer(long n) {
  if (n < 1 || n > kMaxEnumerationN) {
    throw InvalidParameter("mask memorizer needs 1 <= n <= enumeration guard");
  }
  DiscreteLearner dl;
  dl.m = 1L << n;
  dl.loss = [n](long w, const Instance& z) {
    const auto j = static_cast<long>(std::lround(z.x.at(0)));
    if (j < 0 || j >= 2 * n) throw InvalidParameter("index-encoded sample out of range");
    const long i = j % n;
    const long half = j / n;
    // Sample j is covered by hypothesis w iff w's mask picks it for training.
    return ((w >> i) & 1) == half ? 0.0 : 1.0;
  };
  dl.posterior = [n](const Supersample& ss, const Mask& mask) {
    (void)ss;
    std::vector<double> p(static_cast<std::size_t>(1L << n), 0.0);
    p[mask.to_index()] = 1.0;
    return p;
  };
  return dl;
}

Supersample index_supersample(long n) {
  Supersample ss;
  ss.n = n;
  ss.samples.resize(static_cast<std::size_t>(2 * n));
  for (std::size_t j = 0; j < ss.samples.size(); ++j) {
    ss.samples[j].x = {static_cast<double>(j)};
    ss.samples[j].label = 0;
  }
  ss.validate();
  return ss;
}

DiscreteLearner constant_learner(std::vector<double> probs,
                                 std::function<double(long, const Instance&)> loss) {
  DiscreteLearner dl;
  dl.m = static_cast<long>(probs.size());
  dl.posterior = [probs](const Supersample&, const Mask&) { return probs; };
  dl.loss = std::move(loss);
  return dl;
}

std::function<TailTrial(RandomStream&)> fast_tail_sampler(ThresholdToy toy, long n,
                                                          BoundParams params) {
  if (params.n != n) throw InvalidParameter("params.n must match the toy's n");
  check_enumeration(n);
  return [toy, n, params](RandomStream& rng) {
    const DiscreteLearner dl = toy.learner();
    const Supersample ss = toy.draw(n, rng);
    const Mask mask = Mask::random(n, rng);
    const std::vector<double> p = dl.posterior(ss, mask);
    const std::vector<double> q = enumerate_marginal(dl, ss);
    const double kl = kl_discrete(p, q);
    const auto train_of = [&](long w) {
      return train_loss(ss, mask, [&](const Instance& z) { return dl.loss(w, z); });
    };
    const auto test_of = [&](long w) {
      return test_loss(ss, mask, [&](const Instance& z) { return dl.loss(w, z); });
    };
    const double lt = posterior_average(p, train_of);
    const double lv = posterior_average(p, test_of);
    return TailTrial{fast_pacb(lt, kl, params).value, lv};
  };
}

std::function<TailTrial(RandomStream&)> interp_tail_sampler(long n, double delta) {
  check_enumeration(n);
  return [n, delta](RandomStream& rng) {
    const SubsetMemorizerToy toy;
    const DiscreteLearner dl = toy.learner();
    const Supersample ss = toy.draw(n, rng);
    const Mask mask = Mask::random(n, rng);
    const std::vector<double> p = dl.posterior(ss, mask);
    const std::vector<double> q = enumerate_marginal(dl, ss);
    const double kl = kl_discrete(p, q);
    const auto test_of = [&](long w) {
      return test_loss(ss, mask, [&](const Instance& z) { return dl.loss(w, z); });
    };
    const double lv = posterior_average(p, test_of);
    return TailTrial{interp_pacb(kl, n, delta).value, lv};
  };
}

}  // namespace cibound::toys
