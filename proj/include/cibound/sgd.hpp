#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cibound/model.hpp"

namespace cibound {

// Minibatch SGD with classical momentum and a step-decay schedule.
struct SGDConfig {
  double alpha0 = 0.01;     // initial learning rate
  double decay_rate = 2.0;  // schedule decay factor (distinct from any bound parameter)
  int epoch_interval = 20;  // epochs between decay steps
  double momentum = 0.9;
  int batch_size = 512;
  int epochs = 100;
  std::uint64_t seed = 0;
  // When set, training stops after the first epoch whose 0-1 training
  // error is <= this value.
  std::optional<double> stop_at_train_loss;

  void validate() const;
};

// alpha0 / (1 + decay_rate * floor(epoch / epoch_interval)).
double learning_rate(int epoch, const SGDConfig& cfg);

// Runs minibatch SGD on the cross-entropy loss starting from `init`.
// Velocity update v <- momentum*v - alpha*grad, w <- w + v. Batches are
// drawn by a seeded per-epoch reshuffle, so identical (spec, data, config,
// init) inputs give bit-identical weights. Throws TrainingDiverged when
// the weights stop being finite.
std::vector<double> sgd_train(const ModelSpec& spec, const std::vector<Instance>& data,
                              const SGDConfig& cfg, const std::vector<double>& init);

}  // namespace cibound
