#include "cibound/discrete.hpp"

#include <cmath>
#include <string>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"

namespace cibound {

namespace {

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

void DiscreteLearner::validate() const {
  if (m < 1) throw InvalidParameter("discrete learner needs m >= 1 hypotheses");
  if (!posterior) throw InvalidParameter("discrete learner needs a posterior");
  if (!loss) throw InvalidParameter("discrete learner needs a loss");
}

void check_enumeration(long n) {
  if (n > kMaxEnumerationN) {
    throw EnumerationLimit("exact enumeration refused: 2^" + std::to_string(n) +
                           " masks exceeds the 2^" + std::to_string(kMaxEnumerationN) +
                           " guard; use the Monte Carlo path");
  }
}

void check_distribution(const std::vector<double>& p, long m) {
  if (static_cast<long>(p.size()) != m) {
    throw InvalidParameter("posterior has wrong length");
  }
  KahanSum sum;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidParameter("posterior entries must be nonnegative and finite");
    }
    sum.add(v);
  }
  if (std::abs(sum.value() - 1.0) > 1e-12) {
    throw InvalidParameter("posterior does not sum to 1");
  }
}

std::vector<double> enumerate_marginal(const DiscreteLearner& learner,
                                       const Supersample& ss) {
  learner.validate();
  ss.validate();
  check_enumeration(ss.n);
  const std::uint64_t count = std::uint64_t{1} << ss.n;
  std::vector<KahanSum> acc(static_cast<std::size_t>(learner.m));
  for (std::uint64_t s = 0; s < count; ++s) {
    const Mask mask = Mask::from_index(ss.n, s);
    const std::vector<double> p = learner.posterior(ss, mask);
    check_distribution(p, learner.m);
    for (std::size_t w = 0; w < p.size(); ++w) acc[w].add(p[w]);
  }
  std::vector<double> q(acc.size());
  const double scale = 1.0 / static_cast<double>(count);
  for (std::size_t w = 0; w < acc.size(); ++w) q[w] = acc[w].value() * scale;
  return q;
}

double exact_cmi(const DiscreteLearner& learner, const Supersample& ss) {
  learner.validate();
  ss.validate();
  check_enumeration(ss.n);
  const std::uint64_t count = std::uint64_t{1} << ss.n;
  // E_S[KL(p_S || q)] = E_S[sum_w p log p] - sum_w q log q, because the
  // mask-average of p_S is exactly q.
  std::vector<KahanSum> acc(static_cast<std::size_t>(learner.m));
  KahanSum entropy_terms;
  for (std::uint64_t s = 0; s < count; ++s) {
    const Mask mask = Mask::from_index(ss.n, s);
    const std::vector<double> p = learner.posterior(ss, mask);
    check_distribution(p, learner.m);
    for (std::size_t w = 0; w < p.size(); ++w) {
      acc[w].add(p[w]);
      entropy_terms.add(xlogx(p[w]));
    }
  }
  const double scale = 1.0 / static_cast<double>(count);
  KahanSum marginal_term;
  for (auto& a : acc) marginal_term.add(xlogx(a.value() * scale));
  const double cmi = entropy_terms.value() * scale - marginal_term.value();
  return cmi < 0.0 ? 0.0 : cmi;  // clamp the few-ulp negatives of exact zeros
}

std::vector<double> exact_samplewise_cmi_all(const DiscreteLearner& learner,
                                             const Supersample& ss) {
  learner.validate();
  ss.validate();
  check_enumeration(ss.n);
  const std::uint64_t count = std::uint64_t{1} << ss.n;
  const auto m = static_cast<std::size_t>(learner.m);
  const auto n = static_cast<std::size_t>(ss.n);
  // cond[i][b][w] accumulates the posterior over masks whose bit i equals b.
  std::vector<KahanSum> cond(n * 2 * m);
  std::vector<KahanSum> overall(m);
  for (std::uint64_t s = 0; s < count; ++s) {
    const Mask mask = Mask::from_index(ss.n, s);
    const std::vector<double> p = learner.posterior(ss, mask);
    check_distribution(p, learner.m);
    for (std::size_t w = 0; w < m; ++w) {
      overall[w].add(p[w]);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = (s >> i) & 1u;
        cond[(i * 2 + b) * m + w].add(p[w]);
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(count);
  std::vector<double> q(m);
  for (std::size_t w = 0; w < m; ++w) q[w] = overall[w].value() * scale;

  std::vector<double> result(n);
  for (std::size_t i = 0; i < n; ++i) {
    KahanSum info;
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t w = 0; w < m; ++w) {
        // Conditional P(w | S_i = b): the accumulator covers 2^(n-1) masks.
        const double cw = cond[(i * 2 + b) * m + w].value() * scale * 2.0;
        if (cw > 0.0) info.add(0.5 * cw * std::log(cw / q[w]));
      }
    }
    result[i] = info.value() < 0.0 ? 0.0 : info.value();
  }
  return result;
}

double exact_samplewise_cmi(const DiscreteLearner& learner, const Supersample& ss,
                            long i) {
  if (i < 0 || i >= ss.n) throw InvalidParameter("sample index out of range");
  return exact_samplewise_cmi_all(learner, ss)[static_cast<std::size_t>(i)];
}

}  // namespace cibound
