#include "cibound/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cibound/errors.hpp"
#include "cibound/random.hpp"

namespace cibound {

void SGDConfig::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw InvalidParameter("alpha0 must be positive");
  }
  if (decay_rate < 0.0 || !std::isfinite(decay_rate)) {
    throw InvalidParameter("decay_rate must be >= 0");
  }
  if (epoch_interval < 1) throw InvalidParameter("epoch_interval must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) throw InvalidParameter("momentum must lie in [0, 1)");
  if (batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
  if (epochs < 0) throw InvalidParameter("epochs must be >= 0");
  if (stop_at_train_loss &&
      (*stop_at_train_loss < 0.0 || *stop_at_train_loss > 1.0)) {
    throw InvalidParameter("stop_at_train_loss must lie in [0, 1]");
  }
}

double learning_rate(int epoch, const SGDConfig& cfg) {
  cfg.validate();
  if (epoch < 0) throw InvalidParameter("epoch must be >= 0");
  return cfg.alpha0 / (1.0 + cfg.decay_rate * static_cast<double>(epoch / cfg.epoch_interval));
}

std::vector<double> sgd_train(const ModelSpec& spec, const std::vector<Instance>& data,
                              const SGDConfig& cfg, const std::vector<double>& init) {
  spec.validate();
  cfg.validate();
  if (data.empty()) throw InvalidParameter("sgd_train needs a nonempty dataset");
  if (init.size() != spec.weight_count()) {
    throw InvalidParameter("initial weights have wrong size");
  }

  std::vector<double> w = init;
  std::vector<double> velocity(w.size(), 0.0);
  std::vector<double> grad(w.size(), 0.0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const RandomStream base(cfg.seed);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double alpha = learning_rate(epoch, cfg);

    RandomStream shuffle = base.child(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.below(i)]);
    }

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        add_gradient(spec, w, data[order[k]], grad);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t j = 0; j < w.size(); ++j) {
        velocity[j] = cfg.momentum * velocity[j] - alpha * grad[j] * scale;
        w[j] += velocity[j];
      }
    }

    for (double v : w) {
      if (!std::isfinite(v)) throw TrainingDiverged("weights became non-finite during SGD");
    }

    if (cfg.stop_at_train_loss &&
        mean_zero_one(spec, w, data) <= *cfg.stop_at_train_loss) {
      break;
    }
  }
  return w;
}

}  // namespace cibound
