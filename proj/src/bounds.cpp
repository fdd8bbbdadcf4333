#include "cibound/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cibound/errors.hpp"
#include "cibound/numeric.hpp"

namespace cibound {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw InvalidParameter(msg);
}

void require_feasible(const BoundParams& p) {
  p.validate();
  if (!is_feasible(p.lambda, p.gamma)) {
    throw InvalidParameter("(lambda, gamma) violates the exponential-inequality condition");
  }
}

double log_one_over(double delta) { return -std::log(delta); }

// log(sqrt(n)/delta), computed as 0.5*log(n) - log(delta).
double slow_log_term(long n, double delta) {
  return 0.5 * std::log(static_cast<double>(n)) - std::log(delta);
}

BoundResult make_result(BoundKind kind, double value, const BoundParams& params,
                        double train_loss, bool valid = true) {
  BoundResult r;
  r.value = value;
  r.kind = kind;
  r.params = params;
  r.train_loss_used = train_loss;
  r.valid = valid;
  return r;
}

void check_train_loss(double t) {
  require(t >= 0.0 && t <= 1.0 && std::isfinite(t), "train_loss must lie in [0, 1]");
}

void check_delta(double delta) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

}  // namespace

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::SteinkeSlow: return "steinke-slow";
    case BoundKind::SteinkeFast: return "steinke-fast";
    case BoundKind::SlowPACB: return "slow-pacb";
    case BoundKind::SlowSD: return "slow-sd";
    case BoundKind::FastAvg: return "fast-avg";
    case BoundKind::FastPACB: return "fast-pacb";
    case BoundKind::FastSD: return "fast-sd";
    case BoundKind::SamplewiseAvg: return "samplewise-avg";
    case BoundKind::InterpAvg: return "interp-avg";
    case BoundKind::InterpPACB: return "interp-pacb";
    case BoundKind::InterpSD: return "interp-sd";
    case BoundKind::SamplewiseInterpAvg: return "samplewise-interp-avg";
  }
  return "unknown";
}

std::optional<BoundKind> bound_kind_from_string(const std::string& name) {
  static const BoundKind kAll[] = {
      BoundKind::SteinkeSlow,   BoundKind::SteinkeFast, BoundKind::SlowPACB,
      BoundKind::SlowSD,        BoundKind::FastAvg,     BoundKind::FastPACB,
      BoundKind::FastSD,        BoundKind::SamplewiseAvg, BoundKind::InterpAvg,
      BoundKind::InterpPACB,    BoundKind::InterpSD,    BoundKind::SamplewiseInterpAvg,
  };
  for (BoundKind k : kAll) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void BoundParams::validate() const {
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
  check_delta(delta);
  require(n >= 1, "n must be at least 1");
}

void InfoBudget::validate(long n) const {
  switch (kind) {
    case InfoKind::InfoDensity:
      require(std::isfinite(value), "information density must be finite");
      break;
    case InfoKind::SamplewiseCMI:
      require(static_cast<long>(samplewise.size()) == n,
              "samplewise CMI list must have length n");
      for (double v : samplewise) {
        require(v >= 0.0 && std::isfinite(v), "samplewise CMI entries must be >= 0");
      }
      break;
    default:
      require(value >= 0.0 && std::isfinite(value), "KL/CMI value must be >= 0");
      break;
  }
}

double InfoBudget::total() const {
  if (kind == InfoKind::SamplewiseCMI) {
    KahanSum s;
    for (double v : samplewise) s.add(v);
    return s.value();
  }
  return value;
}

double feasibility_lhs(double lambda, double gamma) {
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
  const double c = std::expm1(lambda) - lambda;
  return lambda * (1.0 - gamma) + c * (1.0 + gamma * gamma);
}

std::optional<std::pair<double, double>> feasible_gamma_interval(double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
  const double em1 = std::expm1(lambda);
  const double c = em1 - lambda;
  // Condition as a quadratic in gamma: c*g^2 - lambda*g + em1 <= 0
  // (note lambda + c = e^lambda - 1).
  const double disc = lambda * lambda - 4.0 * c * em1;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  return std::make_pair((lambda - root) / (2.0 * c), (lambda + root) / (2.0 * c));
}

double max_feasible_lambda(double tolerance) {
  require(tolerance > 0.0, "tolerance must be positive");
  const auto g = [](double lam) {
    const double em1 = std::expm1(lam);
    return lam * lam - 4.0 * em1 * (em1 - lam);
  };
  double lo = 0.3;   // g(0.3) > 0
  double hi = 0.4;   // g(0.4) < 0
  for (int i = 0; i < 200 && hi - lo > tolerance; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BoundParams optimize_params(double train_loss, const InfoBudget& info, long n, double delta) {
  check_train_loss(train_loss);
  check_delta(delta);
  require(n >= 2, "optimize_params requires n >= 2");
  require(info.kind == InfoKind::ExpectedKL || info.kind == InfoKind::ConditionalKL ||
              info.kind == InfoKind::InfoDensity,
          "optimize_params expects an ExpectedKL, ConditionalKL or InfoDensity budget");
  info.validate(n);

  // Confidence term enters for the PAC-Bayesian and single-draw variants only.
  const double extra = info.kind == InfoKind::ExpectedKL ? 0.0 : log_one_over(delta);
  const double numer = info.value + extra;
  const double dn = static_cast<double>(n);

  const double lam_star = max_feasible_lambda(1e-12);
  const double lam_min = 1e-3;
  constexpr int kGridPoints = 1000;
  const double log_ratio = std::log(lam_star / lam_min);

  bool found = false;
  double best_value = std::numeric_limits<double>::infinity();
  BoundParams best;
  for (int i = 0; i < kGridPoints; ++i) {
    // Log-spaced, strictly inside (lam_min, lam_star).
    const double lam =
        lam_min * std::exp(log_ratio * static_cast<double>(i + 1) / (kGridPoints + 1));
    const auto interval = feasible_gamma_interval(lam);
    if (!interval) continue;
    double gamma = interval->first;
    // The computed root can land a few ulps outside the feasible region;
    // nudge it inward so the returned pair always passes the strict check.
    if (!is_feasible(lam, gamma)) gamma *= 1.0 + 1e-12;
    if (!is_feasible(lam, gamma)) continue;
    const double value = gamma * train_loss + numer * (1.0 / lam) / dn;
    if (value < best_value) {
      best_value = value;
      best = BoundParams{lam, gamma, delta, n};
      found = true;
    }
  }
  if (!found) throw std::logic_error("optimize_params: no feasible grid point");
  return best;
}

BoundResult slow_pacb(double train_loss, double kl_nats, long n, double delta) {
  check_train_loss(train_loss);
  require(kl_nats >= 0.0 && std::isfinite(kl_nats), "kl must be >= 0");
  require(n >= 2, "slow-rate bounds require n >= 2");
  check_delta(delta);
  const double radicand = (2.0 / static_cast<double>(n - 1)) * (kl_nats + slow_log_term(n, delta));
  BoundParams p;
  p.delta = delta;
  p.n = n;
  return make_result(BoundKind::SlowPACB, train_loss + std::sqrt(radicand), p, train_loss);
}

BoundResult slow_sd(double train_loss, double info_density_nats, long n, double delta) {
  check_train_loss(train_loss);
  require(std::isfinite(info_density_nats), "information density must be finite");
  require(n >= 2, "slow-rate bounds require n >= 2");
  check_delta(delta);
  BoundParams p;
  p.delta = delta;
  p.n = n;
  const double inner = info_density_nats + slow_log_term(n, delta);
  if (inner < 0.0) {
    return make_result(BoundKind::SlowSD, train_loss, p, train_loss, /*valid=*/false);
  }
  const double radicand = (2.0 / static_cast<double>(n - 1)) * inner;
  return make_result(BoundKind::SlowSD, train_loss + std::sqrt(radicand), p, train_loss);
}

BoundResult fast_avg(double train_loss, double expected_kl_nats, const BoundParams& params) {
  check_train_loss(train_loss);
  require(expected_kl_nats >= 0.0 && std::isfinite(expected_kl_nats), "kl must be >= 0");
  require_feasible(params);
  const double value = params.gamma * train_loss +
                       expected_kl_nats * (1.0 / params.lambda) / static_cast<double>(params.n);
  return make_result(BoundKind::FastAvg, value, params, train_loss);
}

BoundResult fast_pacb(double train_loss, double kl_nats, const BoundParams& params) {
  check_train_loss(train_loss);
  require(kl_nats >= 0.0 && std::isfinite(kl_nats), "kl must be >= 0");
  require_feasible(params);
  const double numer = kl_nats + log_one_over(params.delta);
  const double value =
      params.gamma * train_loss + numer * (1.0 / params.lambda) / static_cast<double>(params.n);
  return make_result(BoundKind::FastPACB, value, params, train_loss);
}

BoundResult fast_sd(double train_loss, double info_density_nats, const BoundParams& params) {
  check_train_loss(train_loss);
  require(std::isfinite(info_density_nats), "information density must be finite");
  require_feasible(params);
  const double numer = info_density_nats + log_one_over(params.delta);
  const double floor = params.gamma * train_loss;
  if (numer < 0.0) {
    return make_result(BoundKind::FastSD, floor, params, train_loss, /*valid=*/false);
  }
  const double value = floor + numer * (1.0 / params.lambda) / static_cast<double>(params.n);
  return make_result(BoundKind::FastSD, value, params, train_loss);
}

BoundResult samplewise_avg(double train_loss, std::span<const double> samplewise_cmi,
                           const BoundParams& params) {
  check_train_loss(train_loss);
  require_feasible(params);
  require(static_cast<long>(samplewise_cmi.size()) == params.n,
          "samplewise CMI list must have length n");
  KahanSum sum;
  for (double v : samplewise_cmi) {
    require(v >= 0.0 && std::isfinite(v), "samplewise CMI entries must be >= 0");
    sum.add(v);
  }
  const double value = params.gamma * train_loss +
                       sum.value() * (1.0 / params.lambda) / static_cast<double>(params.n);
  return make_result(BoundKind::SamplewiseAvg, value, params, train_loss);
}

BoundResult interp_avg(double cmi_nats, long n) {
  require(cmi_nats >= 0.0 && std::isfinite(cmi_nats), "cmi must be >= 0");
  require(n >= 1, "n must be at least 1");
  BoundParams p;
  p.n = n;
  const double value = cmi_nats / (static_cast<double>(n) * std::numbers::ln2);
  return make_result(BoundKind::InterpAvg, value, p, 0.0);
}

BoundResult interp_pacb(double kl_nats, long n, double delta) {
  require(kl_nats >= 0.0 && std::isfinite(kl_nats), "kl must be >= 0");
  require(n >= 1, "n must be at least 1");
  check_delta(delta);
  BoundParams p;
  p.delta = delta;
  p.n = n;
  const double value =
      (kl_nats + log_one_over(delta)) / (static_cast<double>(n) * std::numbers::ln2);
  return make_result(BoundKind::InterpPACB, value, p, 0.0);
}

BoundResult interp_sd(double info_density_nats, long n, double delta) {
  require(std::isfinite(info_density_nats), "information density must be finite");
  require(n >= 1, "n must be at least 1");
  check_delta(delta);
  BoundParams p;
  p.delta = delta;
  p.n = n;
  const double numer = info_density_nats + log_one_over(delta);
  if (numer < 0.0) {
    return make_result(BoundKind::InterpSD, 0.0, p, 0.0, /*valid=*/false);
  }
  const double value = numer / (static_cast<double>(n) * std::numbers::ln2);
  return make_result(BoundKind::InterpSD, value, p, 0.0);
}

BoundResult samplewise_interp_avg(std::span<const double> samplewise_cmi, long n) {
  require(n >= 1, "n must be at least 1");
  require(static_cast<long>(samplewise_cmi.size()) == n,
          "samplewise CMI list must have length n");
  KahanSum sum;
  for (double v : samplewise_cmi) {
    require(v >= 0.0 && std::isfinite(v), "samplewise CMI entries must be >= 0");
    sum.add(v);
  }
  BoundParams p;
  p.n = n;
  const double value = sum.value() / (static_cast<double>(n) * std::numbers::ln2);
  return make_result(BoundKind::SamplewiseInterpAvg, value, p, 0.0);
}

BoundResult steinke_slow(double train_loss, double cmi_nats, long n) {
  check_train_loss(train_loss);
  require(cmi_nats >= 0.0 && std::isfinite(cmi_nats), "cmi must be >= 0");
  require(n >= 1, "n must be at least 1");
  BoundParams p;
  p.n = n;
  const double value = train_loss + std::sqrt(2.0 * cmi_nats / static_cast<double>(n));
  return make_result(BoundKind::SteinkeSlow, value, p, train_loss);
}

BoundResult steinke_fast(double train_loss, double cmi_nats, long n) {
  check_train_loss(train_loss);
  require(cmi_nats >= 0.0 && std::isfinite(cmi_nats), "cmi must be >= 0");
  require(n >= 1, "n must be at least 1");
  BoundParams p;
  p.lambda = 1.0 / 3.0;
  p.gamma = 2.0;
  p.n = n;
  const double value = 2.0 * train_loss + cmi_nats * 3.0 / static_cast<double>(n);
  return make_result(BoundKind::SteinkeFast, value, p, train_loss);
}

double split_delta(double delta_total, long k) {
  check_delta(delta_total);
  require(k >= 1, "k must be at least 1");
  return delta_total / static_cast<double>(k);
}

}  // namespace cibound
