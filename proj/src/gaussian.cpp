#include "cibound/gaussian.hpp"

#include <cmath>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"
#include "cibound/random.hpp"

namespace cibound {

void IsotropicGaussian::validate() const {
  if (mean.empty()) throw InvalidParameter("Gaussian mean must have dimension >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter("Gaussian sigma must be positive and finite");
  }
  for (double m : mean) {
    if (!std::isfinite(m)) throw InvalidParameter("Gaussian mean must be finite");
  }
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidParameter("vector dimension mismatch");
  KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s.add(d * d);
  }
  return s.value();
}

double kl_isotropic(const IsotropicGaussian& p, const IsotropicGaussian& q) {
  p.validate();
  q.validate();
  if (p.dim() != q.dim()) throw InvalidParameter("Gaussian dimension mismatch");
  const double d = static_cast<double>(p.dim());
  const double vp = p.sigma * p.sigma;
  const double vq = q.sigma * q.sigma;
  const double shape = d * (std::log(vq / vp) + vp / vq - 1.0) / 2.0;
  return shape + squared_distance(p.mean, q.mean) / (2.0 * vq);
}

double log_density_ratio(const IsotropicGaussian& p, const IsotropicGaussian& q,
                         const std::vector<double>& w) {
  p.validate();
  q.validate();
  if (p.dim() != q.dim()) throw InvalidParameter("Gaussian dimension mismatch");
  if (w.size() != p.dim()) throw InvalidParameter("weight vector dimension mismatch");
  const double d = static_cast<double>(p.dim());
  const double vp = p.sigma * p.sigma;
  const double vq = q.sigma * q.sigma;
  return d * std::log(q.sigma / p.sigma) + squared_distance(w, q.mean) / (2.0 * vq) -
         squared_distance(w, p.mean) / (2.0 * vp);
}

std::vector<double> sample(const IsotropicGaussian& p, RandomStream& rng) {
  p.validate();
  std::vector<double> w(p.dim());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = p.mean[i] + p.sigma * rng.normal();
  }
  return w;
}

}  // namespace cibound
