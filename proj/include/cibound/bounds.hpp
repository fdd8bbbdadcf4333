#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cibound {

/// Every bound family the library evaluates. "Slow" bounds carry a
/// sqrt(IM/n) information term, "fast" bounds an IM/n term, and the
/// interpolating family applies only when the training loss is exactly zero.
enum class BoundKind {
  SteinkeSlow,
  SteinkeFast,
  SlowPACB,
  SlowSD,
  FastAvg,
  FastPACB,
  FastSD,
  SamplewiseAvg,
  InterpAvg,
  InterpPACB,
  InterpSD,
  SamplewiseInterpAvg,
};

const char* to_string(BoundKind kind);
std::optional<BoundKind> bound_kind_from_string(const std::string& name);

/// Parameters shared by the fast-rate bounds: the exponential-inequality
/// constants (lambda, gamma), the confidence parameter delta, and the
/// training-set size n.
struct BoundParams {
  double lambda = 1.0 / 2.98;
  double gamma = 1.795;
  double delta = 0.05;
  long n = 2;

  /// Throws InvalidParameter unless lambda > 0, gamma > 0, 0 < delta < 1 and
  /// n >= 1. Slow-rate bounds additionally require n >= 2 (they divide by
  /// n - 1); that is enforced at their entry points.
  void validate() const;
};

enum class InfoKind { ExpectedKL, ConditionalKL, InfoDensity, CMI, SamplewiseCMI };

/// An information budget in nats. KL and CMI kinds must be nonnegative; an
/// information density may be negative. SamplewiseCMI carries one value per
/// training sample.
struct InfoBudget {
  InfoKind kind = InfoKind::ConditionalKL;
  double value = 0.0;
  std::vector<double> samplewise;

  void validate(long n) const;
  double total() const;
};

/// A computed loss bound. Values >= 1 are vacuous for a [0,1] loss but are
/// reported verbatim, never clamped. `valid` is false when a degenerate
/// information term forced the value onto its floor (possible only for the
/// single-draw bounds, whose information density may be negative).
struct BoundResult {
  double value = 0.0;
  BoundKind kind = BoundKind::FastPACB;
  BoundParams params;
  double train_loss_used = 0.0;
  bool valid = true;

  bool vacuous() const { return value >= 1.0; }
};

/// Left-hand side of the exponential-inequality feasibility condition,
/// lambda(1-gamma) + (e^lambda - 1 - lambda)(1 + gamma^2). The pair
/// (lambda, gamma) is feasible iff this is <= 0.
double feasibility_lhs(double lambda, double gamma);

inline bool is_feasible(double lambda, double gamma) {
  return feasibility_lhs(lambda, gamma) <= 0.0;
}

/// The closed interval of gamma for which (lambda, gamma) is feasible, or
/// nullopt when no gamma works at this lambda. The condition is the upward
/// quadratic c*g^2 - lambda*g + (lambda + c) <= 0 with c = e^lambda-1-lambda,
/// so the endpoints are its roots.
std::optional<std::pair<double, double>> feasible_gamma_interval(double lambda);

/// Largest lambda admitting any feasible gamma: the root of
/// lambda^2 - 4(e^lambda - 1)(e^lambda - 1 - lambda) on [0.3, 0.4], located
/// by bisection to the given bracket tolerance. Lies in (0.36, 0.37).
double max_feasible_lambda(double tolerance = 1e-12);

/// Grid search for the (lambda, gamma) minimizing the fast-rate bound on the
/// given inputs: 1000 log-spaced lambda values inside (1e-3, lambda*), gamma
/// fixed to the lower root of the feasible interval (the bound grows with
/// gamma, so only the lower edge can win). Deterministic.
BoundParams optimize_params(double train_loss, const InfoBudget& info, long n, double delta);

/// Slow-rate PAC-Bayesian test-loss bound:
///   train + sqrt( (2/(n-1)) * (kl + log(sqrt(n)/delta)) ).
BoundResult slow_pacb(double train_loss, double kl_nats, long n, double delta);

/// Single-draw counterpart of slow_pacb with the information density (or its
/// log-density-ratio proxy) in place of the KL. A negative radicand yields
/// value = train_loss with valid = false.
BoundResult slow_sd(double train_loss, double info_density_nats, long n, double delta);

/// Fast-rate average population-loss bound: gamma*train + kl/(lambda*n).
BoundResult fast_avg(double train_loss, double expected_kl_nats, const BoundParams& params);

/// Fast-rate PAC-Bayesian test-loss bound:
///   gamma*train + (kl + log(1/delta))/(lambda*n).
BoundResult fast_pacb(double train_loss, double kl_nats, const BoundParams& params);

/// Fast-rate single-draw bound; the information density may be negative. If
/// the whole information term goes negative the value is floored at
/// gamma*train and flagged valid = false.
BoundResult fast_sd(double train_loss, double info_density_nats, const BoundParams& params);

/// Samplewise fast-rate average bound: gamma*train + (sum_i I_i)/(lambda*n).
BoundResult samplewise_avg(double train_loss, std::span<const double> samplewise_cmi,
                           const BoundParams& params);

/// Interpolating average bound, cmi/(n log 2). Caller asserts that the
/// training loss is zero; the subset harness checks it.
BoundResult interp_avg(double cmi_nats, long n);
BoundResult interp_pacb(double kl_nats, long n, double delta);
BoundResult interp_sd(double info_density_nats, long n, double delta);
BoundResult samplewise_interp_avg(std::span<const double> samplewise_cmi, long n);

/// The two CMI bounds: train + sqrt(2*cmi/n) and 2*train + 3*cmi/n. The
/// second coincides with fast_avg at gamma = 2, lambda = 1/3.
BoundResult steinke_slow(double train_loss, double cmi_nats, long n);
BoundResult steinke_fast(double train_loss, double cmi_nats, long n);

/// Union-bound confidence split: delta_total / k.
double split_delta(double delta_total, long k);

}  // namespace cibound
