#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cibound/bounds.hpp"
#include "cibound/data.hpp"
#include "cibound/gaussian.hpp"
#include "cibound/sgd.hpp"
#include "cibound/subset.hpp"
#include "cibound/table.hpp"

namespace cibound {

// One-significant-digit sigma value a * 10^-b, kept in exact integer form
// so neighbouring grids never suffer float round trips.
struct GridSigma {
  int a = 1;  // 1..9
  int b = 0;

  double value() const;
  void validate() const;
};

struct SigmaSearchConfig {
  double threshold = 0.05;  // allowed loss perturbation
  int mc_weight_draws = 5;  // stochastic-weight draws per candidate
  int b_start = 0;          // first (largest-sigma) decade searched
  int b_floor = 10;         // give up below 10^-b_floor

  void validate() const;
};

// Largest sigma on the one-significant-digit grid such that the mean 0-1
// loss over mc_weight_draws draws of N(mean, sigma^2 I) stays within
// cfg.threshold of reference_loss on `view`. Scans sigma in decreasing
// order (b ascending, a descending within each decade) and returns the
// first hit; throws SigmaSearchFailed when the grid floor is reached.
// Deterministic: every candidate evaluates on its own child stream keyed
// by (b, a), independent of scan order.
GridSigma sigma_search(const ModelSpec& spec, const std::vector<double>& mean,
                       double reference_loss, const std::vector<Instance>& view,
                       const SigmaSearchConfig& cfg, RandomStream& rng);

// The 27 candidates around sigma_tilde = a'*10^-b': all a in 1..9 for
// b in {b'-1, b', b'+1}, ascending. Always contains sigma_tilde.
std::vector<GridSigma> candidate_sigmas(const GridSigma& sigma_tilde);

struct PriorConfig {
  int num_subsets = 10;

  void validate() const;
};

// Data-dependent prior built from the whole supersample: one model is
// trained per window of n consecutive samples (windows linearly spaced
// from the first n to the last n), all from the same initialization; the
// prior mean is the average of the trained weights and its sigma comes
// from sigma_search against the mean-weight loss on all 2n samples.
struct PriorResult {
  std::vector<double> mu2;
  GridSigma sigma_tilde;
};

PriorResult build_prior(const ModelSpec& spec, const Supersample& ss,
                        const SGDConfig& sgd_cfg, const std::vector<double>& init,
                        const PriorConfig& pcfg, const SigmaSearchConfig& scfg,
                        RandomStream& rng);

// Evaluates one (slow, fast) PAC-Bayesian bound pair at a given sigma2 and
// per-bound confidence delta_each.
using BoundEvaluator =
    std::function<std::pair<BoundResult, BoundResult>(double sigma2, double delta_each)>;

// Exhaustive scan over the candidate grid with union-bound accounting:
// delta_each = delta_total / (candidates * bounds_per_candidate). Returns
// the per-kind minimizing candidates; ties prefer the larger sigma.
struct SigmaSelection {
  GridSigma sigma2_slow;
  GridSigma sigma2_fast;
  BoundResult slow_bound;
  BoundResult fast_bound;
  double delta_each = 0.0;
};

SigmaSelection select_sigma2(const std::vector<GridSigma>& candidates,
                             const BoundEvaluator& evaluator, double delta_total,
                             long bounds_per_candidate);

enum class SweepKind { TrainSize, Epochs };

struct ExperimentConfig {
  SweepKind sweep_kind = SweepKind::TrainSize;
  std::vector<long> sweep_values;  // n values, or epoch counts
  long n = 500;                    // training-set size when sweeping epochs

  SynthSpec synth;                       // synthetic source (count is derived)
  std::optional<Dataset> fixed_data;     // external source; overrides synth
  double randomize_fraction = 0.0;       // label-randomization fraction
  bool binarize = false;                 // collapse labels 0..4 / 5..9

  ModelSpec model;
  SGDConfig sgd;
  SigmaSearchConfig sigma;
  PriorConfig prior;

  int replicas = 10;    // independent mask draws per sweep point
  int loss_draws = 5;   // stochastic-weight draws for loss estimates
  double delta = 0.05;  // total confidence budget per sweep point
  bool single_draw = false;
  double lambda = 1.0 / 2.98;
  double gamma = 1.795;
  std::uint64_t master_seed = 1;

  void validate() const;
};

// One mask replica: stochastic loss estimates over loss_draws weight draws
// plus the selected bounds. Single-draw fields are NaN unless requested.
struct ReplicaRow {
  int replica = 0;
  double train_mean = 0.0, train_std = 0.0;
  double test_mean = 0.0, test_std = 0.0;
  double slow_bound = 0.0, fast_bound = 0.0;
  double sigma1 = 0.0, sigma2_slow = 0.0, sigma2_fast = 0.0;
  double kl_slow = 0.0, kl_fast = 0.0;
  double slow_sd = 0.0, fast_sd = 0.0;
};

struct SweepPointResult {
  long sweep_value = 0;
  std::vector<ReplicaRow> rows;
  // Across-replica aggregates of the row means/bounds (sample std).
  double train_avg = 0.0, train_std = 0.0;
  double test_avg = 0.0, test_std = 0.0;
  double slow_avg = 0.0, slow_std = 0.0;
  double fast_avg = 0.0, fast_std = 0.0;
};

struct ExperimentReport {
  std::vector<SweepPointResult> points;
  std::uint64_t master_seed = 0;
};

// The full experiment: per sweep point, draw data, build the shared
// initialization and the supersample-level prior, then run `replicas`
// independent mask replicas (posterior training, sigma searches, candidate
// grid, bounds, loss draws) and aggregate. Replicas run in parallel; all
// randomness is derived per (point, replica) so results are independent of
// the worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Rows (sweep value, train/test/slow/fast mean and std) in the plot-data
// column order.
ResultTable result_table(const ExperimentReport& report);

}  // namespace cibound
