#pragma once

#include <cstddef>
#include <vector>

#include "cibound/data.hpp"

namespace cibound {

class RandomStream;

enum class Architecture { Linear, MLP };

// A softmax classifier: either a single affine layer or a ReLU multilayer
// perceptron. Weights live in one flat vector so they can be averaged,
// perturbed with Gaussian noise, and fed to the information measures.
struct ModelSpec {
  Architecture architecture = Architecture::Linear;
  std::vector<int> hidden;  // layer widths, used only for MLP
  int input_dim = 2;
  int num_classes = 2;
  double init_std = 0.01;

  void validate() const;
  // Widths of every layer including input and output,
  // e.g. {input_dim, h1, ..., num_classes}.
  std::vector<int> layer_widths() const;
  std::size_t weight_count() const;
};

// Flat-vector layout: per layer, the (out x in) weight matrix row-major,
// then the out biases.
struct LayerSlice {
  int in = 0;
  int out = 0;
  std::size_t w_off = 0;
  std::size_t b_off = 0;
};
std::vector<LayerSlice> layer_slices(const ModelSpec& spec);

// All parameters drawn iid N(0, init_std^2).
std::vector<double> init_weights(const ModelSpec& spec, RandomStream& rng);

// Class scores before softmax.
std::vector<double> logits(const ModelSpec& spec, const std::vector<double>& w,
                           const std::vector<double>& x);

int predict(const ModelSpec& spec, const std::vector<double>& w,
            const std::vector<double>& x);

// Cross-entropy -log softmax(logits)[label], computed via log-sum-exp.
double cross_entropy(const ModelSpec& spec, const std::vector<double>& w,
                     const Instance& z);

// Classification error in {0, 1}.
double zero_one(const ModelSpec& spec, const std::vector<double>& w, const Instance& z);

// Adds the gradient of cross_entropy at z to grad (same layout as w).
void add_gradient(const ModelSpec& spec, const std::vector<double>& w, const Instance& z,
                  std::vector<double>& grad);

double mean_zero_one(const ModelSpec& spec, const std::vector<double>& w,
                     const std::vector<Instance>& data);
double mean_cross_entropy(const ModelSpec& spec, const std::vector<double>& w,
                          const std::vector<Instance>& data);

}  // namespace cibound
