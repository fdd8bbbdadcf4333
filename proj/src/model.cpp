#include "cibound/model.hpp"

#include <algorithm>
#include <cmath>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"
#include "cibound/random.hpp"

namespace cibound {

namespace {

void affine(const std::vector<double>& w, const LayerSlice& layer,
            const std::vector<double>& in, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(layer.out), 0.0);
  for (int r = 0; r < layer.out; ++r) {
    const std::size_t row = layer.w_off + static_cast<std::size_t>(r * layer.in);
    double acc = w[layer.b_off + static_cast<std::size_t>(r)];
    for (int c = 0; c < layer.in; ++c) {
      acc += w[row + static_cast<std::size_t>(c)] * in[static_cast<std::size_t>(c)];
    }
    out[static_cast<std::size_t>(r)] = acc;
  }
}

// Forward pass keeping every post-activation (acts[0] is the input); the
// last entry holds the raw logits.
std::vector<std::vector<double>> forward_trace(const ModelSpec& spec,
                                               const std::vector<double>& w,
                                               const std::vector<double>& x) {
  const auto layers = layer_slices(spec);
  std::vector<std::vector<double>> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> next;
    affine(w, layers[l], acts.back(), next);
    if (l + 1 < layers.size()) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

double log_sum_exp(const std::vector<double>& v) {
  const double peak = *std::max_element(v.begin(), v.end());
  KahanSum s;
  for (double x : v) s.add(std::exp(x - peak));
  return peak + std::log(s.value());
}

void check_input(const ModelSpec& spec, const std::vector<double>& w,
                 const std::vector<double>& x) {
  if (w.size() != spec.weight_count()) throw InvalidParameter("weight vector has wrong size");
  if (x.size() != static_cast<std::size_t>(spec.input_dim)) {
    throw InvalidParameter("feature vector has wrong dimension");
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (input_dim < 1) throw InvalidParameter("input_dim must be >= 1");
  if (num_classes < 2) throw InvalidParameter("num_classes must be >= 2");
  if (!(init_std > 0.0)) throw InvalidParameter("init_std must be positive");
  if (architecture == Architecture::MLP) {
    if (hidden.empty()) throw InvalidParameter("MLP needs at least one hidden width");
    for (int h : hidden) {
      if (h < 1) throw InvalidParameter("hidden widths must be positive");
    }
  }
}

std::vector<int> ModelSpec::layer_widths() const {
  validate();
  std::vector<int> widths{input_dim};
  if (architecture == Architecture::MLP) {
    widths.insert(widths.end(), hidden.begin(), hidden.end());
  }
  widths.push_back(num_classes);
  return widths;
}

std::vector<LayerSlice> layer_slices(const ModelSpec& spec) {
  const auto widths = spec.layer_widths();
  std::vector<LayerSlice> out;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    LayerSlice s;
    s.in = widths[l];
    s.out = widths[l + 1];
    s.w_off = off;
    off += static_cast<std::size_t>(s.in) * static_cast<std::size_t>(s.out);
    s.b_off = off;
    off += static_cast<std::size_t>(s.out);
    out.push_back(s);
  }
  return out;
}

std::size_t ModelSpec::weight_count() const {
  const auto layers = layer_slices(*this);
  const LayerSlice& last = layers.back();
  return last.b_off + static_cast<std::size_t>(last.out);
}

std::vector<double> init_weights(const ModelSpec& spec, RandomStream& rng) {
  spec.validate();
  std::vector<double> w(spec.weight_count());
  for (double& v : w) v = spec.init_std * rng.normal();
  return w;
}

std::vector<double> logits(const ModelSpec& spec, const std::vector<double>& w,
                           const std::vector<double>& x) {
  check_input(spec, w, x);
  return forward_trace(spec, w, x).back();
}

int predict(const ModelSpec& spec, const std::vector<double>& w,
            const std::vector<double>& x) {
  const auto scores = logits(spec, w, x);
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) -
                          scores.begin());
}

double cross_entropy(const ModelSpec& spec, const std::vector<double>& w,
                     const Instance& z) {
  if (z.label < 0 || z.label >= spec.num_classes) {
    throw InvalidParameter("label out of range for model");
  }
  const auto scores = logits(spec, w, z.x);
  return log_sum_exp(scores) - scores[static_cast<std::size_t>(z.label)];
}

double zero_one(const ModelSpec& spec, const std::vector<double>& w, const Instance& z) {
  return predict(spec, w, z.x) == z.label ? 0.0 : 1.0;
}

void add_gradient(const ModelSpec& spec, const std::vector<double>& w, const Instance& z,
                  std::vector<double>& grad) {
  check_input(spec, w, z.x);
  if (grad.size() != w.size()) throw InvalidParameter("gradient vector has wrong size");
  if (z.label < 0 || z.label >= spec.num_classes) {
    throw InvalidParameter("label out of range for model");
  }
  const auto layers = layer_slices(spec);
  const auto acts = forward_trace(spec, w, z.x);

  // Softmax cross-entropy: dlogits = softmax - onehot(label).
  const std::vector<double>& scores = acts.back();
  const double lse = log_sum_exp(scores);
  std::vector<double> delta(scores.size());
  for (std::size_t k = 0; k < scores.size(); ++k) delta[k] = std::exp(scores[k] - lse);
  delta[static_cast<std::size_t>(z.label)] -= 1.0;

  for (std::size_t l = layers.size(); l-- > 0;) {
    const LayerSlice& layer = layers[l];
    const std::vector<double>& input = acts[l];
    for (int r = 0; r < layer.out; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const std::size_t row = layer.w_off + static_cast<std::size_t>(r * layer.in);
      for (int c = 0; c < layer.in; ++c) {
        grad[row + static_cast<std::size_t>(c)] += d * input[static_cast<std::size_t>(c)];
      }
      grad[layer.b_off + static_cast<std::size_t>(r)] += d;
    }
    if (l == 0) break;
    // Backpropagate through the previous ReLU: acts[l] is its output, so
    // the derivative is the indicator acts[l] > 0.
    std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
    for (int c = 0; c < layer.in; ++c) {
      if (input[static_cast<std::size_t>(c)] <= 0.0) continue;
      double acc = 0.0;
      for (int r = 0; r < layer.out; ++r) {
        acc += w[layer.w_off + static_cast<std::size_t>(r * layer.in + c)] *
               delta[static_cast<std::size_t>(r)];
      }
      prev[static_cast<std::size_t>(c)] = acc;
    }
    delta = std::move(prev);
  }
}

double mean_zero_one(const ModelSpec& spec, const std::vector<double>& w,
                     const std::vector<Instance>& data) {
  if (data.empty()) throw InvalidParameter("mean over empty dataset");
  KahanSum s;
  for (const Instance& z : data) s.add(zero_one(spec, w, z));
  return s.value() / static_cast<double>(data.size());
}

double mean_cross_entropy(const ModelSpec& spec, const std::vector<double>& w,
                          const std::vector<Instance>& data) {
  if (data.empty()) throw InvalidParameter("mean over empty dataset");
  KahanSum s;
  for (const Instance& z : data) s.add(cross_entropy(spec, w, z));
  return s.value() / static_cast<double>(data.size());
}

}  // namespace cibound
