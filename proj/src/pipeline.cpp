#include "cibound/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"
#include "cibound/parallel.hpp"
#include "cibound/random.hpp"

namespace cibound {

namespace {

// Child-stream tags for the experiment's derivation tree. Every stream is
// keyed by position (sweep point, replica, purpose), never by draw order,
// so any subset of the work can run on any worker.
enum Tag : std::uint64_t {
  kTagData = 1,
  kTagTransform = 2,
  kTagInit = 3,
  kTagPrior = 4,
  kTagReplicaBase = 100,
  kTagMask = 0,
  kTagTrainSeed = 1,
  kTagSigma1 = 2,
  kTagLossDraws = 3,
  kTagSingleDraw = 4,
};

}  // namespace

double GridSigma::value() const {
  validate();
  return static_cast<double>(a) * std::pow(10.0, static_cast<double>(-b));
}

void GridSigma::validate() const {
  if (a < 1 || a > 9) throw InvalidParameter("grid sigma digit must be in 1..9");
}

void SigmaSearchConfig::validate() const {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw InvalidParameter("sigma threshold must be positive");
  }
  if (mc_weight_draws < 1) throw InvalidParameter("mc_weight_draws must be >= 1");
  if (b_floor < b_start) throw InvalidParameter("sigma grid floor precedes its start");
}

void PriorConfig::validate() const {
  if (num_subsets < 1) throw InvalidParameter("num_subsets must be >= 1");
}

GridSigma sigma_search(const ModelSpec& spec, const std::vector<double>& mean,
                       double reference_loss, const std::vector<Instance>& view,
                       const SigmaSearchConfig& cfg, RandomStream& rng) {
  cfg.validate();
  spec.validate();
  if (view.empty()) throw InvalidParameter("sigma_search needs a nonempty view");
  if (mean.size() != spec.weight_count()) {
    throw InvalidParameter("sigma_search mean has wrong size");
  }

  for (int b = cfg.b_start; b <= cfg.b_floor; ++b) {
    for (int a = 9; a >= 1; --a) {
      const GridSigma candidate{a, b};
      const IsotropicGaussian dist{mean, candidate.value()};
      RandomStream stream = rng.child(
          static_cast<std::uint64_t>(b - cfg.b_start) * 16u + static_cast<std::uint64_t>(a));
      KahanSum acc;
      for (int d = 0; d < cfg.mc_weight_draws; ++d) {
        const std::vector<double> w = sample(dist, stream);
        acc.add(mean_zero_one(spec, w, view));
      }
      const double stochastic = acc.value() / static_cast<double>(cfg.mc_weight_draws);
      if (std::abs(stochastic - reference_loss) <= cfg.threshold) return candidate;
    }
  }
  throw SigmaSearchFailed("no sigma on the grid down to 10^-" +
                          std::to_string(cfg.b_floor) +
                          " keeps the stochastic loss within the threshold");
}

std::vector<GridSigma> candidate_sigmas(const GridSigma& sigma_tilde) {
  sigma_tilde.validate();
  std::vector<GridSigma> out;
  out.reserve(27);
  // Ascending value: the larger b decade first, digits 1..9 inside it.
  for (int b : {sigma_tilde.b + 1, sigma_tilde.b, sigma_tilde.b - 1}) {
    for (int a = 1; a <= 9; ++a) out.push_back(GridSigma{a, b});
  }
  return out;
}

PriorResult build_prior(const ModelSpec& spec, const Supersample& ss,
                        const SGDConfig& sgd_cfg, const std::vector<double>& init,
                        const PriorConfig& pcfg, const SigmaSearchConfig& scfg,
                        RandomStream& rng) {
  pcfg.validate();
  ss.validate();
  const long n = ss.n;
  const int subsets = pcfg.num_subsets;

  // Window k starts at round(k * n / (K-1)): the first window is the first
  // n samples, the last is the last n, the rest linearly spaced.
  std::vector<std::vector<double>> weights(static_cast<std::size_t>(subsets));
  parallel_for(static_cast<std::size_t>(subsets), [&](std::size_t k) {
    const long start =
        subsets > 1 ? static_cast<long>(std::llround(
                          static_cast<double>(k) * static_cast<double>(n) /
                          static_cast<double>(subsets - 1)))
                    : 0;
    std::vector<Instance> window(ss.samples.begin() + start,
                                 ss.samples.begin() + start + n);
    SGDConfig cfg = sgd_cfg;
    cfg.seed = rng.child(kTagReplicaBase + k).key();
    weights[k] = sgd_train(spec, window, cfg, init);
  });

  PriorResult out;
  out.mu2.assign(init.size(), 0.0);
  for (std::size_t j = 0; j < out.mu2.size(); ++j) {
    KahanSum s;
    for (const auto& w : weights) s.add(w[j]);
    out.mu2[j] = s.value() / static_cast<double>(subsets);
  }

  const double reference = mean_zero_one(spec, out.mu2, ss.samples);
  RandomStream search_stream = rng.child(kTagSigma1);
  out.sigma_tilde = sigma_search(spec, out.mu2, reference, ss.samples, scfg, search_stream);
  return out;
}

SigmaSelection select_sigma2(const std::vector<GridSigma>& candidates,
                             const BoundEvaluator& evaluator, double delta_total,
                             long bounds_per_candidate) {
  if (candidates.empty()) throw InvalidParameter("select_sigma2 needs candidates");
  if (bounds_per_candidate < 1) {
    throw InvalidParameter("bounds_per_candidate must be >= 1");
  }
  SigmaSelection sel;
  sel.delta_each = split_delta(
      delta_total, static_cast<long>(candidates.size()) * bounds_per_candidate);

  double best_slow = std::numeric_limits<double>::infinity();
  double best_fast = std::numeric_limits<double>::infinity();
  // Candidates ascend, so accepting ties (<=) leaves the largest sigma in
  // place: the more conservative prior wins among equals.
  for (const GridSigma& cand : candidates) {
    const auto [slow, fast] = evaluator(cand.value(), sel.delta_each);
    if (slow.value <= best_slow) {
      best_slow = slow.value;
      sel.sigma2_slow = cand;
      sel.slow_bound = slow;
    }
    if (fast.value <= best_fast) {
      best_fast = fast.value;
      sel.sigma2_fast = cand;
      sel.fast_bound = fast;
    }
  }
  return sel;
}

void ExperimentConfig::validate() const {
  model.validate();
  sgd.validate();
  sigma.validate();
  prior.validate();
  if (!fixed_data) synth.validate();
  if (n < 2) throw InvalidParameter("training-set size must be >= 2");
  for (long v : sweep_values) {
    if (v < (sweep_kind == SweepKind::TrainSize ? 2 : 0)) {
      throw InvalidParameter("sweep value out of range");
    }
  }
  if (replicas < 1) throw InvalidParameter("replicas must be >= 1");
  if (loss_draws < 1) throw InvalidParameter("loss_draws must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("delta must lie in (0, 1)");
  if (randomize_fraction < 0.0 || randomize_fraction > 1.0) {
    throw InvalidParameter("randomize_fraction must lie in [0, 1]");
  }
  if (!is_feasible(lambda, gamma)) {
    throw InvalidParameter("(lambda, gamma) violates the exponential-inequality condition");
  }
}

namespace {

Supersample point_supersample(const ExperimentConfig& cfg, long n, RandomStream& point) {
  Dataset data;
  if (cfg.fixed_data) {
    const Dataset& src = *cfg.fixed_data;
    if (src.items.size() < static_cast<std::size_t>(2 * n)) {
      throw InvalidParameter("fixed dataset too small for 2n samples");
    }
    // Seeded shuffle, then slice: supersample composition stays a uniform
    // draw from the file regardless of its on-disk order.
    std::vector<std::size_t> order(src.items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    RandomStream shuffle = point.child(kTagData);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.below(i)]);
    }
    data.num_classes = src.num_classes;
    data.items.reserve(static_cast<std::size_t>(2 * n));
    for (long i = 0; i < 2 * n; ++i) {
      data.items.push_back(src.items[order[static_cast<std::size_t>(i)]]);
    }
  } else {
    SynthSpec spec = cfg.synth;
    spec.count = 2 * n;
    RandomStream draw = point.child(kTagData);
    data = synth_dataset(spec, draw);
  }
  if (cfg.binarize) data = binarize_labels(data);
  if (cfg.randomize_fraction > 0.0) {
    RandomStream noise = point.child(kTagTransform);
    data = randomize_labels(data, cfg.randomize_fraction, data.num_classes, noise);
  }
  return supersample_from(data, n);
}

struct LossDrawStats {
  double train_mean = 0.0, train_std = 0.0;
  double test_mean = 0.0, test_std = 0.0;
};

LossDrawStats stochastic_losses(const ModelSpec& spec, const IsotropicGaussian& posterior,
                                const std::vector<Instance>& train_view,
                                const std::vector<Instance>& test_view, int draws,
                                RandomStream& rng) {
  std::vector<double> train(static_cast<std::size_t>(draws));
  std::vector<double> test(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    const std::vector<double> w = sample(posterior, rng);
    train[static_cast<std::size_t>(d)] = mean_zero_one(spec, w, train_view);
    test[static_cast<std::size_t>(d)] = mean_zero_one(spec, w, test_view);
  }
  LossDrawStats out;
  out.train_mean = mean(train);
  out.train_std = sample_std(train);
  out.test_mean = mean(test);
  out.test_std = sample_std(test);
  return out;
}

ReplicaRow run_replica(const ExperimentConfig& cfg, const ModelSpec& spec,
                       const Supersample& ss, const SGDConfig& sgd_cfg,
                       const std::vector<double>& init, const PriorResult& prior,
                       int replica, RandomStream replica_stream) {
  const long n = ss.n;
  ReplicaRow row;
  row.replica = replica;

  RandomStream mask_stream = replica_stream.child(kTagMask);
  const Mask mask = Mask::random(n, mask_stream);
  const std::vector<Instance> train_view = gather(ss, select_indices(ss, mask));
  const std::vector<Instance> test_view =
      gather(ss, select_indices(ss, mask.complement()));

  SGDConfig train_cfg = sgd_cfg;
  train_cfg.seed = replica_stream.child(kTagTrainSeed).key();
  const std::vector<double> mu1 = sgd_train(spec, train_view, train_cfg, init);

  const double det_train = mean_zero_one(spec, mu1, train_view);
  RandomStream sigma1_stream = replica_stream.child(kTagSigma1);
  const GridSigma sigma1 =
      sigma_search(spec, mu1, det_train, train_view, cfg.sigma, sigma1_stream);
  row.sigma1 = sigma1.value();

  const IsotropicGaussian posterior{mu1, sigma1.value()};
  RandomStream draw_stream = replica_stream.child(kTagLossDraws);
  const LossDrawStats losses = stochastic_losses(spec, posterior, train_view, test_view,
                                                 cfg.loss_draws, draw_stream);
  row.train_mean = losses.train_mean;
  row.train_std = losses.train_std;
  row.test_mean = losses.test_mean;
  row.test_std = losses.test_std;

  const BoundEvaluator evaluator = [&](double sigma2, double delta_each) {
    const IsotropicGaussian pri{prior.mu2, sigma2};
    const double kl = kl_isotropic(posterior, pri);
    BoundParams params;
    params.lambda = cfg.lambda;
    params.gamma = cfg.gamma;
    params.delta = delta_each;
    params.n = n;
    return std::make_pair(slow_pacb(losses.train_mean, kl, n, delta_each),
                          fast_pacb(losses.train_mean, kl, params));
  };
  const SigmaSelection sel =
      select_sigma2(candidate_sigmas(prior.sigma_tilde), evaluator, cfg.delta, 2);
  row.slow_bound = sel.slow_bound.value;
  row.fast_bound = sel.fast_bound.value;
  row.sigma2_slow = sel.sigma2_slow.value();
  row.sigma2_fast = sel.sigma2_fast.value();
  row.kl_slow = kl_isotropic(posterior, IsotropicGaussian{prior.mu2, row.sigma2_slow});
  row.kl_fast = kl_isotropic(posterior, IsotropicGaussian{prior.mu2, row.sigma2_fast});

  if (cfg.single_draw) {
    RandomStream sd_stream = replica_stream.child(kTagSingleDraw);
    const std::vector<double> w = sample(posterior, sd_stream);
    const double lt = mean_zero_one(spec, w, train_view);
    const double info_slow =
        log_density_ratio(posterior, IsotropicGaussian{prior.mu2, row.sigma2_slow}, w);
    const double info_fast =
        log_density_ratio(posterior, IsotropicGaussian{prior.mu2, row.sigma2_fast}, w);
    BoundParams params;
    params.lambda = cfg.lambda;
    params.gamma = cfg.gamma;
    params.delta = sel.delta_each;
    params.n = n;
    row.slow_sd = slow_sd(lt, info_slow, n, sel.delta_each).value;
    row.fast_sd = fast_sd(lt, info_fast, params).value;
  } else {
    row.slow_sd = std::numeric_limits<double>::quiet_NaN();
    row.fast_sd = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

void aggregate_point(SweepPointResult& point) {
  std::vector<double> train, test, slow, fast;
  for (const ReplicaRow& row : point.rows) {
    train.push_back(row.train_mean);
    test.push_back(row.test_mean);
    slow.push_back(row.slow_bound);
    fast.push_back(row.fast_bound);
  }
  point.train_avg = mean(train);
  point.train_std = sample_std(train);
  point.test_avg = mean(test);
  point.test_std = sample_std(test);
  point.slow_avg = mean(slow);
  point.slow_std = sample_std(slow);
  point.fast_avg = mean(fast);
  point.fast_std = sample_std(fast);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.master_seed = cfg.master_seed;
  const RandomStream master(cfg.master_seed);

  for (std::size_t ip = 0; ip < cfg.sweep_values.size(); ++ip) {
    const long value = cfg.sweep_values[ip];
    const long n = cfg.sweep_kind == SweepKind::TrainSize ? value : cfg.n;
    SGDConfig sgd_cfg = cfg.sgd;
    if (cfg.sweep_kind == SweepKind::Epochs) sgd_cfg.epochs = static_cast<int>(value);

    RandomStream point = master.child(ip);
    const Supersample ss = point_supersample(cfg, n, point);

    RandomStream init_stream = point.child(kTagInit);
    const std::vector<double> init = init_weights(cfg.model, init_stream);

    RandomStream prior_stream = point.child(kTagPrior);
    const PriorResult prior = build_prior(cfg.model, ss, sgd_cfg, init, cfg.prior,
                                          cfg.sigma, prior_stream);

    SweepPointResult result;
    result.sweep_value = value;
    result.rows.resize(static_cast<std::size_t>(cfg.replicas));
    parallel_for(static_cast<std::size_t>(cfg.replicas), [&](std::size_t r) {
      try {
        result.rows[r] =
            run_replica(cfg, cfg.model, ss, sgd_cfg, init, prior, static_cast<int>(r),
                        point.child(kTagReplicaBase + r));
      } catch (const std::exception& e) {
        throw std::runtime_error("replica " + std::to_string(r) + " at sweep value " +
                                 std::to_string(value) + ": " + e.what());
      }
    });
    aggregate_point(result);
    report.points.push_back(std::move(result));
  }
  return report;
}

ResultTable result_table(const ExperimentReport& report) {
  ResultTable table;
  for (const SweepPointResult& p : report.points) {
    table.rows.push_back({static_cast<double>(p.sweep_value), p.train_avg, p.train_std,
                          p.test_avg, p.test_std, p.slow_avg, p.slow_std, p.fast_avg,
                          p.fast_std});
  }
  return table;
}

}  // namespace cibound
