#pragma once

#include <cstddef>
#include <vector>

namespace cibound {

class RandomStream;

// Isotropic Gaussian N(mean, sigma^2 I) over weight space.
struct IsotropicGaussian {
  std::vector<double> mean;
  double sigma = 1.0;

  std::size_t dim() const { return mean.size(); }
  void validate() const;
};

// Squared Euclidean distance with compensated summation (stable for large d).
double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

// KL(p || q) in nats:
//   d*(log(sq^2/sp^2) + sp^2/sq^2 - 1)/2 + |mu_p - mu_q|^2 / (2 sq^2).
double kl_isotropic(const IsotropicGaussian& p, const IsotropicGaussian& q);

// log p(w) - log q(w) in nats:
//   d*log(sq/sp) + |w - mu_q|^2/(2 sq^2) - |w - mu_p|^2/(2 sp^2).
double log_density_ratio(const IsotropicGaussian& p, const IsotropicGaussian& q,
                         const std::vector<double>& w);

// Draw mu + sigma * xi with xi iid standard normal, consuming the stream.
std::vector<double> sample(const IsotropicGaussian& p, RandomStream& rng);

}  // namespace cibound
