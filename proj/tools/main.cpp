#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cibound/bounds.hpp"
#include "cibound/config.hpp"
#include "cibound/errors.hpp"
#include "cibound/pipeline.hpp"
#include "cibound/random.hpp"
#include "cibound/table.hpp"
#include "cibound/toys.hpp"
#include "cibound/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitComputation = 2;
constexpr int kExitVerification = 3;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, bool& drawn) {
  if (flag) {
    drawn = false;
    return *flag;
  }
  drawn = true;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void print_seed(std::uint64_t seed, bool drawn) {
  std::printf("seed %llu%s\n", static_cast<unsigned long long>(seed),
              drawn ? " (drawn from entropy; pass --seed to reproduce)" : "");
}

// ---- params ----

struct ParamsArgs {
  std::optional<double> lambda;
  std::optional<double> gamma;
  bool frontier = false;
  bool optimize = false;
  double train = 0.0;
  double info = 0.0;
  std::string info_kind = "conditional-kl";
  long n = 1000;
  double delta = 0.05;
};

int run_params(const ParamsArgs& args) {
  using namespace cibound;
  if (args.frontier) {
    std::printf("max feasible lambda %.12f\n", max_feasible_lambda());
    return kExitOk;
  }
  if (args.optimize) {
    InfoBudget budget;
    if (args.info_kind == "expected-kl") {
      budget.kind = InfoKind::ExpectedKL;
    } else if (args.info_kind == "conditional-kl") {
      budget.kind = InfoKind::ConditionalKL;
    } else if (args.info_kind == "info-density") {
      budget.kind = InfoKind::InfoDensity;
    } else {
      std::fprintf(stderr, "unknown info kind: %s\n", args.info_kind.c_str());
      return kExitUsage;
    }
    budget.value = args.info;
    const BoundParams best = optimize_params(args.train, budget, args.n, args.delta);
    const BoundResult bound = budget.kind == InfoKind::ExpectedKL
                                  ? fast_avg(args.train, budget.value, best)
                                  : fast_pacb(args.train, budget.value, best);
    std::printf("lambda %.12f\ngamma %.12f\nbound %.12f\n", best.lambda, best.gamma,
                bound.value);
    return kExitOk;
  }
  if (!args.lambda || !args.gamma) {
    std::fprintf(stderr, "params needs --lambda and --gamma (or --frontier/--optimize)\n");
    return kExitUsage;
  }
  const double lhs = feasibility_lhs(*args.lambda, *args.gamma);
  const bool ok = lhs <= 0.0;
  std::printf("feasibility_lhs %.12g\nfeasible %s\n", lhs, ok ? "yes" : "no");
  if (const auto interval = feasible_gamma_interval(*args.lambda)) {
    std::printf("gamma_interval [%.12f, %.12f]\n", interval->first, interval->second);
  } else {
    std::printf("gamma_interval (empty)\n");
  }
  std::printf("max_feasible_lambda %.12f\n", max_feasible_lambda());
  return ok ? kExitOk : kExitVerification;
}

// ---- bound ----

struct BoundArgs {
  std::string kind;
  double train = 0.0;
  double info = 0.0;
  std::vector<double> samplewise;
  long n = 1000;
  double delta = 0.05;
  double lambda = 1.0 / 2.98;
  double gamma = 1.795;
};

int run_bound(const BoundArgs& args) {
  using namespace cibound;
  const auto kind = bound_kind_from_string(args.kind);
  if (!kind) {
    std::fprintf(stderr, "unknown bound kind: %s\n", args.kind.c_str());
    return kExitUsage;
  }
  BoundParams params;
  params.lambda = args.lambda;
  params.gamma = args.gamma;
  params.delta = args.delta;
  params.n = args.n;

  const bool wants_samplewise = *kind == BoundKind::SamplewiseAvg ||
                                *kind == BoundKind::SamplewiseInterpAvg;
  if (wants_samplewise && args.samplewise.empty()) {
    std::fprintf(stderr, "%s needs --samplewise values\n", args.kind.c_str());
    return kExitUsage;
  }

  BoundResult result;
  switch (*kind) {
    case BoundKind::SteinkeSlow:
      result = steinke_slow(args.train, args.info, args.n);
      break;
    case BoundKind::SteinkeFast:
      result = steinke_fast(args.train, args.info, args.n);
      break;
    case BoundKind::SlowPACB:
      result = slow_pacb(args.train, args.info, args.n, args.delta);
      break;
    case BoundKind::SlowSD:
      result = slow_sd(args.train, args.info, args.n, args.delta);
      break;
    case BoundKind::FastAvg:
      result = fast_avg(args.train, args.info, params);
      break;
    case BoundKind::FastPACB:
      result = fast_pacb(args.train, args.info, params);
      break;
    case BoundKind::FastSD:
      result = fast_sd(args.train, args.info, params);
      break;
    case BoundKind::SamplewiseAvg:
      params.n = static_cast<long>(args.samplewise.size());
      result = samplewise_avg(args.train, args.samplewise, params);
      break;
    case BoundKind::InterpAvg:
      result = interp_avg(args.info, args.n);
      break;
    case BoundKind::InterpPACB:
      result = interp_pacb(args.info, args.n, args.delta);
      break;
    case BoundKind::InterpSD:
      result = interp_sd(args.info, args.n, args.delta);
      break;
    case BoundKind::SamplewiseInterpAvg:
      result = samplewise_interp_avg(args.samplewise,
                                     static_cast<long>(args.samplewise.size()));
      break;
  }
  std::printf("%s,%.17g,%d\n", to_string(result.kind), result.value,
              result.vacuous() ? 1 : 0);
  std::printf("bound %s: value %.6f (%s%s)\n", to_string(result.kind), result.value,
              result.vacuous() ? "vacuous" : "nonvacuous",
              result.valid ? "" : ", degenerate information term");
  return kExitOk;
}

// ---- verify ----

struct VerifyArgs {
  std::string which;
  std::string toy;  // threshold | subset-mem | mask-mem (default depends on which)
  long n = 8;
  long trials = 0;
  double delta = 0.05;
  std::optional<std::uint64_t> seed;
};

struct ToySetup {
  cibound::DiscreteLearner learner;
  cibound::Supersample ss;
};

ToySetup make_toy(const std::string& name, long n, cibound::RandomStream& rng) {
  using namespace cibound;
  if (name == "threshold") {
    toys::ThresholdToy toy;
    return {toy.learner(), toy.draw(n, rng)};
  }
  if (name == "subset-mem") {
    toys::SubsetMemorizerToy toy;
    return {toy.learner(), toy.draw(n, rng)};
  }
  if (name == "mask-mem") {
    return {toys::mask_memorizer(n), toys::index_supersample(n)};
  }
  throw InvalidParameter("unknown toy: " + name +
                         " (expected threshold, subset-mem or mask-mem)");
}

int report_moment(const char* label, const cibound::MomentEstimate& est) {
  if (est.exact) {
    std::printf("%s exact moment %.12f (contract <= 1)\n", label, est.estimate);
  } else {
    std::printf("%s mc moment %.6f +- %.6f (contract <= 1 + 3 se)\n", label, est.estimate,
                est.std_error);
  }
  return est.holds() ? kExitOk : kExitVerification;
}

int run_verify(const VerifyArgs& args) {
  using namespace cibound;
  bool drawn = false;
  const std::uint64_t seed = resolve_seed(args.seed, drawn);
  print_seed(seed, drawn);
  RandomStream rng(seed);

  if (args.which == "tail") {
    if (!(args.delta > 0.0 && args.delta <= 1.0)) {
      throw InvalidParameter("tail delta must lie in (0, 1]");
    }
    const long trials = args.trials > 0 ? args.trials : 2000;
    // Bound formulas need delta < 1; at delta = 1 the log(1/delta) term is 0
    // anyway, so a hair below 1 computes the same bound.
    const double bound_delta = std::min(args.delta, 1.0 - 1e-12);
    BoundParams params;
    params.delta = bound_delta;
    params.n = args.n;
    RandomStream fast_rng = rng.child(1);
    const double fast_rate = tail_coverage(
        toys::fast_tail_sampler(toys::ThresholdToy{}, args.n, params), trials, fast_rng);
    RandomStream interp_rng = rng.child(2);
    const double interp_rate = tail_coverage(
        toys::interp_tail_sampler(args.n, bound_delta), trials, interp_rng);
    const double allowed = args.delta + tail_slack(args.delta, trials);
    std::printf("fast-pacb violation rate %.6f (allowed %.6f)\n", fast_rate, allowed);
    std::printf("interp-pacb violation rate %.6f (allowed %.6f)\n", interp_rate, allowed);
    return fast_rate <= allowed && interp_rate <= allowed ? kExitOk : kExitVerification;
  }

  std::string toy_name = args.toy;
  if (toy_name.empty()) toy_name = args.which == "interp" ? "subset-mem" : "threshold";
  RandomStream toy_rng = rng.child(0);
  ToySetup setup = make_toy(toy_name, args.n, toy_rng);

  int status;
  const std::vector<double> marginal = enumerate_marginal(setup.learner, setup.ss);
  if (args.which == "fast") {
    status = report_moment("fast", exact_moment_fast(setup.learner, setup.ss,
                                                     BoundParams{.n = args.n}));
    if (status == kExitOk && args.trials > 0) {
      RandomStream mc = rng.child(3);
      status = report_moment(
          "fast", mc_moment_fast_discrete(setup.learner, setup.ss, marginal,
                                          BoundParams{.n = args.n}, args.trials, mc));
    }
  } else if (args.which == "slow") {
    status = report_moment("slow", exact_moment_slow(setup.learner, setup.ss));
  } else if (args.which == "interp") {
    status = report_moment("interp", exact_moment_interp(setup.learner, setup.ss));
    if (status == kExitOk && args.trials > 0) {
      RandomStream mc = rng.child(3);
      status = report_moment("interp",
                             mc_moment_interp_discrete(setup.learner, setup.ss, marginal,
                                                       args.trials, mc));
    }
  } else {
    std::fprintf(stderr, "unknown verifier: %s (expected fast, slow, interp or tail)\n",
                 args.which.c_str());
    return kExitUsage;
  }
  std::printf("%s\n", status == kExitOk ? "PASS" : "FAIL");
  return status;
}

// ---- experiment ----

struct ExperimentArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
  bool csv = false;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  using namespace cibound;
  RunConfig run = load_run_config(args.config_path);
  bool drawn = false;
  if (args.seed) {
    run.experiment.master_seed = *args.seed;
    run.seed_provided = true;
  } else if (!run.seed_provided) {
    run.experiment.master_seed = resolve_seed(std::nullopt, drawn);
  }
  if (!args.output.empty()) run.output = args.output;
  if (args.csv) run.csv = true;
  print_seed(run.experiment.master_seed, drawn);

  const ExperimentReport report = run_experiment(run.experiment);
  const ResultTable table = result_table(report);
  const std::string text = run.csv ? format_table_csv(table) : format_table(table);
  write_atomic(run.output, text);
  run.seed_provided = true;  // the sidecar always records the seed actually used
  write_atomic(run.output + ".meta.json", run_config_to_json(run));
  std::printf("wrote %s (%zu sweep points)\n", run.output.c_str(), table.rows.size());

  for (const SweepPointResult& p : report.points) {
    std::printf("sweep %ld: train %.4f test %.4f slow %.4f fast %.4f\n", p.sweep_value,
                p.train_avg, p.test_avg, p.slow_avg, p.fast_avg);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalization-bound toolkit: closed-form bounds, exact and Monte Carlo "
               "inequality verification, and the Gaussian posterior/prior experiment "
               "pipeline."};
  app.require_subcommand(1);

  ParamsArgs params_args;
  CLI::App* params = app.add_subcommand(
      "params", "Feasibility analysis and optimization of the (lambda, gamma) pair");
  double lambda_in = 0.0, gamma_in = 0.0;
  CLI::Option* lambda_opt = params->add_option("--lambda", lambda_in, "lambda to check");
  CLI::Option* gamma_opt = params->add_option("--gamma", gamma_in, "gamma to check");
  params->add_flag("--frontier", params_args.frontier, "print the largest feasible lambda");
  params->add_flag("--optimize", params_args.optimize, "grid-search the best pair");
  params->add_option("--train", params_args.train, "training loss for --optimize");
  params->add_option("--info", params_args.info, "information value in nats");
  params->add_option("--info-kind", params_args.info_kind,
                     "expected-kl | conditional-kl | info-density");
  params->add_option("--n", params_args.n, "training-set size");
  params->add_option("--delta", params_args.delta, "confidence parameter");

  BoundArgs bound_args;
  CLI::App* bound = app.add_subcommand("bound", "Evaluate one bound");
  bound->add_option("--kind", bound_args.kind, "bound kind (e.g. fast-pacb)")->required();
  bound->add_option("--train", bound_args.train, "training loss");
  bound->add_option("--info", bound_args.info, "information value in nats");
  bound->add_option("--samplewise", bound_args.samplewise,
                    "per-sample information values in nats");
  bound->add_option("--n", bound_args.n, "training-set size");
  bound->add_option("--delta", bound_args.delta, "confidence parameter");
  bound->add_option("--lambda", bound_args.lambda, "fast-rate lambda");
  bound->add_option("--gamma", bound_args.gamma, "fast-rate gamma");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Check the exponential-moment and tail-coverage contracts on toy learners");
  verify->add_option("--which", verify_args.which, "fast | slow | interp | tail")
      ->required();
  verify->add_option("--toy", verify_args.toy, "threshold | subset-mem | mask-mem");
  verify->add_option("--n", verify_args.n, "supersample half-size");
  verify->add_option("--trials", verify_args.trials, "Monte Carlo trials (0 = exact only)");
  verify->add_option("--delta", verify_args.delta, "tail confidence parameter");
  std::uint64_t verify_seed = 0;
  CLI::Option* verify_seed_opt =
      verify->add_option("--seed", verify_seed, "random seed (omit for entropy)");

  ExperimentArgs exp_args;
  CLI::App* experiment =
      app.add_subcommand("experiment", "Run the full pipeline from a JSON config");
  experiment->add_option("--config", exp_args.config_path, "config file path")->required();
  std::uint64_t exp_seed = 0;
  CLI::Option* exp_seed_opt =
      experiment->add_option("--seed", exp_seed, "master seed override");
  experiment->add_option("--output", exp_args.output, "output table path override");
  experiment->add_flag("--csv", exp_args.csv, "write comma-separated output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (params->parsed()) {
      if (*lambda_opt) params_args.lambda = lambda_in;
      if (*gamma_opt) params_args.gamma = gamma_in;
      return run_params(params_args);
    }
    if (bound->parsed()) return run_bound(bound_args);
    if (verify->parsed()) {
      if (*verify_seed_opt) verify_args.seed = verify_seed;
      return run_verify(verify_args);
    }
    if (experiment->parsed()) {
      if (*exp_seed_opt) exp_args.seed = exp_seed;
      return run_experiment_cmd(exp_args);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitComputation;
  }
  return kExitUsage;
}
