#include <doctest.h>

#include <cibound/errors.hpp>
#include <cibound/gaussian.hpp>
#include <cibound/model.hpp>
#include <cibound/numeric.hpp>
#include <cibound/parallel.hpp>
#include <cibound/pipeline.hpp>
#include <cibound/random.hpp>
#include <cibound/sgd.hpp>
#include <cibound/table.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <vector>

using namespace cibound;

namespace {

ModelSpec small_linear() {
    ModelSpec spec;
    spec.architecture = Architecture::Linear;
    spec.input_dim = 4;
    spec.num_classes = 2;
    return spec;
}

// A well-separated tiny experiment the pipeline can finish in milliseconds.
ExperimentConfig tiny_experiment() {
    ExperimentConfig cfg;
    cfg.sweep_kind = SweepKind::TrainSize;
    cfg.sweep_values = {24, 48};
    cfg.synth.dim = 4;
    cfg.synth.separation = 3.0;
    cfg.synth.noise_sigma = 1.0;
    cfg.model = small_linear();
    cfg.sgd.alpha0 = 0.05;
    cfg.sgd.epochs = 15;
    cfg.sgd.batch_size = 16;
    cfg.sgd.stop_at_train_loss = 0.0;
    cfg.sigma.threshold = 0.1;
    cfg.prior.num_subsets = 3;
    cfg.replicas = 3;
    cfg.loss_draws = 4;
    cfg.master_seed = 2024;
    return cfg;
}

std::vector<Instance> blob_instances(int count, RandomStream& rng) {
    std::vector<Instance> out;
    for (int i = 0; i < count; ++i) {
        Instance it;
        it.label = rng.bernoulli() ? 1 : 0;
        double c = it.label == 1 ? 2.0 : -2.0;
        it.x = {c + rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        out.push_back(it);
    }
    return out;
}

}  // namespace

TEST_CASE("grid sigma values and validation") {
    GridSigma g;
    g.a = 3;
    g.b = 3;
    CHECK(g.value() == doctest::Approx(3e-3).epsilon(1e-15));
    g.a = 9;
    g.b = 0;
    CHECK(g.value() == doctest::Approx(9.0).epsilon(1e-15));
    g.a = 0;
    CHECK_THROWS_AS(g.validate(), InvalidParameter);
    g.a = 10;
    CHECK_THROWS_AS(g.validate(), InvalidParameter);
    // Negative decades are legal: the candidate grid around a top-decade
    // sigma_tilde extends above 10.
    g.a = 1;
    g.b = -1;
    CHECK_NOTHROW(g.validate());
    CHECK(g.value() == doctest::Approx(10.0));
}

TEST_CASE("candidate_sigmas spans the three neighbouring decades in ascending order") {
    GridSigma tilde;
    tilde.a = 3;
    tilde.b = 3;
    auto c = candidate_sigmas(tilde);
    REQUIRE(c.size() == 27);
    CHECK(c.front().value() == doctest::Approx(1e-4));
    CHECK(c.back().value() == doctest::Approx(9e-2));
    bool contains = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].a == 3 && c[i].b == 3) contains = true;
        if (i > 0) CHECK(c[i].value() > c[i - 1].value());
    }
    CHECK(contains);
}

TEST_CASE("candidate_sigmas at the top decade") {
    GridSigma tilde;
    tilde.a = 9;
    tilde.b = 0;
    auto c = candidate_sigmas(tilde);
    REQUIRE(c.size() == 27);
    // Decades b+1, b, b-1 = {1, 0, -1}: values 0.1..0.9, 1..9, 10..90.
    CHECK(c.front().value() == doctest::Approx(0.1));
    CHECK(c.back().value() == doctest::Approx(90.0));
}

TEST_CASE("sigma_search returns the grid maximum when every sigma is acceptable") {
    // Threshold 1 accepts any perturbation of a [0,1] loss, so the scan stops
    // at the very first (largest) candidate.
    auto spec = small_linear();
    RandomStream rng(121u);
    auto view = blob_instances(16, rng);
    std::vector<double> mean(spec.weight_count(), 0.0);
    SigmaSearchConfig cfg;
    cfg.threshold = 1.0;
    RandomStream search(122u);
    GridSigma got = sigma_search(spec, mean, 0.5, view, cfg, search);
    CHECK(got.a == 9);
    CHECK(got.b == cfg.b_start);
}

TEST_CASE("sigma_search result is stable under re-measurement") {
    auto spec = small_linear();
    RandomStream rng(123u);
    auto data = blob_instances(48, rng);
    auto init = init_weights(spec, rng);
    SGDConfig scfg;
    scfg.alpha0 = 0.05;
    scfg.epochs = 25;
    scfg.batch_size = 16;
    scfg.seed = 4;
    auto w = sgd_train(spec, data, scfg, init);
    const double reference = mean_zero_one(spec, w, data);

    SigmaSearchConfig cfg;
    cfg.threshold = 0.05;
    RandomStream search(124u);
    GridSigma got = sigma_search(spec, w, reference, data, cfg, search);

    // Re-measure at the returned sigma with fresh draws: the perturbed loss
    // must stay within threshold up to Monte-Carlo noise of the 5-draw mean.
    RandomStream fresh(125u);
    const int draws = 40;
    std::vector<double> losses(draws);
    IsotropicGaussian post;
    post.mean = w;
    post.sigma = got.value();
    for (auto& l : losses) {
        auto wp = sample(post, fresh);
        l = mean_zero_one(spec, wp, data);
    }
    double m = mean(losses);
    double se5 = sample_std(losses) / std::sqrt(5.0);  // noise of a 5-draw mean
    CHECK(std::fabs(m - reference) <= cfg.threshold + 2.0 * se5 + 1e-9);
}

TEST_CASE("sigma_search throws when no grid sigma can meet the target") {
    auto spec = small_linear();
    RandomStream rng(126u);
    auto view = blob_instances(5, rng);
    std::vector<double> mean(spec.weight_count(), 0.0);
    SigmaSearchConfig cfg;
    cfg.threshold = 1e-6;
    cfg.b_floor = 3;  // keep the futile scan short
    RandomStream search(127u);
    // Stochastic 0-1 losses over 5 draws on 5 samples live on a grid of
    // multiples of 1/25, so they can never land within 1e-6 of 0.777.
    CHECK_THROWS_AS(sigma_search(spec, mean, 0.777, view, cfg, search), SigmaSearchFailed);
}

TEST_CASE("build_prior averages identical window solutions exactly") {
    // Duplicated halves make every length-n window the same multiset; with
    // full-batch updates the trained weights agree across windows, so the
    // prior mean equals each of them.
    auto spec = small_linear();
    RandomStream rng(128u);
    auto half = blob_instances(12, rng);
    Supersample ss;
    ss.n = 12;
    ss.samples = half;
    ss.samples.insert(ss.samples.end(), half.begin(), half.end());

    auto init = init_weights(spec, rng);
    SGDConfig scfg;
    scfg.alpha0 = 0.05;
    scfg.momentum = 0.0;
    scfg.epochs = 10;
    scfg.batch_size = 12;  // full batch
    PriorConfig pcfg;
    pcfg.num_subsets = 5;
    SigmaSearchConfig sscfg;
    sscfg.threshold = 0.5;
    RandomStream prior_rng(129u);
    PriorResult prior = build_prior(spec, ss, scfg, init, pcfg, sscfg, prior_rng);

    SGDConfig direct_cfg = scfg;
    direct_cfg.seed = 12345;  // irrelevant for full-batch momentum-free SGD
    auto direct = sgd_train(spec, half, direct_cfg, init);
    REQUIRE(prior.mu2.size() == direct.size());
    for (std::size_t k = 0; k < direct.size(); ++k) {
        CHECK(prior.mu2[k] == doctest::Approx(direct[k]).epsilon(1e-9));
    }
}

TEST_CASE("a data-dependent prior sits closer to the posterior than a zero prior") {
    auto spec = small_linear();
    RandomStream rng(130u);
    auto data = blob_instances(64, rng);
    Supersample ss;
    ss.n = 32;
    ss.samples = data;

    auto init = init_weights(spec, rng);
    SGDConfig scfg;
    scfg.alpha0 = 0.05;
    scfg.epochs = 20;
    scfg.batch_size = 16;
    scfg.seed = 6;
    PriorConfig pcfg;
    pcfg.num_subsets = 4;
    SigmaSearchConfig sscfg;
    sscfg.threshold = 0.2;
    RandomStream prior_rng(131u);
    PriorResult prior = build_prior(spec, ss, scfg, init, pcfg, sscfg, prior_rng);

    // Posterior mean: train on the first half.
    std::vector<Instance> train_view(data.begin(), data.begin() + 32);
    auto w1 = sgd_train(spec, train_view, scfg, init);

    IsotropicGaussian post;
    post.mean = w1;
    post.sigma = 0.1;
    IsotropicGaussian informed;
    informed.mean = prior.mu2;
    informed.sigma = 0.1;
    IsotropicGaussian zero;
    zero.mean.assign(w1.size(), 0.0);
    zero.sigma = 0.1;
    CHECK(kl_isotropic(post, informed) < kl_isotropic(post, zero));
}

TEST_CASE("select_sigma2 splits the confidence budget across candidates and kinds") {
    GridSigma tilde;
    tilde.a = 1;
    tilde.b = 1;
    auto candidates = candidate_sigmas(tilde);
    // Bound value rises linearly away from sigma = 0.2 for the slow kind and
    // 0.05 for the fast kind.
    BoundEvaluator eval = [](double sigma2, double delta_each) {
        BoundResult slow;
        slow.value = std::fabs(sigma2 - 0.2);
        BoundResult fast;
        fast.value = std::fabs(sigma2 - 0.05);
        slow.params.delta = delta_each;
        fast.params.delta = delta_each;
        return std::make_pair(slow, fast);
    };
    SigmaSelection sel = select_sigma2(candidates, eval, 0.05, 2);
    CHECK(sel.delta_each == doctest::Approx(0.05 / 54.0).epsilon(1e-15));
    CHECK(sel.sigma2_slow.value() == doctest::Approx(0.2));
    CHECK(sel.sigma2_fast.value() == doctest::Approx(0.05));
    CHECK(sel.slow_bound.value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sel.fast_bound.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("select_sigma2 breaks ties toward the larger sigma") {
    GridSigma tilde;
    tilde.a = 5;
    tilde.b = 2;
    auto candidates = candidate_sigmas(tilde);
    BoundEvaluator flat = [](double, double) {
        BoundResult b;
        b.value = 0.42;
        return std::make_pair(b, b);
    };
    SigmaSelection sel = select_sigma2(candidates, flat, 0.05, 2);
    CHECK(sel.sigma2_slow.value() == doctest::Approx(candidates.back().value()));
    CHECK(sel.sigma2_fast.value() == doctest::Approx(candidates.back().value()));
}

TEST_CASE("tiny experiment runs, aggregates, and is seed-deterministic") {
    ExperimentConfig cfg = tiny_experiment();
    ExperimentReport r1 = run_experiment(cfg);
    REQUIRE(r1.points.size() == 2);
    for (const auto& pt : r1.points) {
        CHECK(pt.rows.size() == 3);
        CHECK(std::isfinite(pt.slow_avg));
        CHECK(std::isfinite(pt.fast_avg));
        CHECK(pt.train_avg >= 0.0);
        CHECK(pt.train_avg <= 1.0);
        for (const auto& row : pt.rows) {
            CHECK(row.sigma1 > 0.0);
            CHECK(row.sigma2_slow > 0.0);
            CHECK(row.kl_slow >= 0.0);
            CHECK(std::isnan(row.slow_sd));  // single_draw off
        }
    }

    ExperimentReport r2 = run_experiment(cfg);
    CHECK(format_table(result_table(r1)) == format_table(result_table(r2)));

    ExperimentConfig other = cfg;
    other.master_seed = 2025;
    ExperimentReport r3 = run_experiment(other);
    CHECK(format_table(result_table(r1)) != format_table(result_table(r3)));
}

TEST_CASE("experiment results do not depend on the worker count") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.sweep_values = {24};

    setenv("CIBOUND_THREADS", "1", 1);
    ExperimentReport serial = run_experiment(cfg);
    setenv("CIBOUND_THREADS", "3", 1);
    ExperimentReport parallel = run_experiment(cfg);
    unsetenv("CIBOUND_THREADS");

    CHECK(format_table(result_table(serial)) == format_table(result_table(parallel)));
}

TEST_CASE("single replica yields zero across-replica spread") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.sweep_values = {24};
    cfg.replicas = 1;
    ExperimentReport r = run_experiment(cfg);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].train_std == 0.0);
    CHECK(r.points[0].slow_std == 0.0);
    CHECK(r.points[0].fast_std == 0.0);
}

TEST_CASE("single_draw mode fills the single-draw columns") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.sweep_values = {24};
    cfg.single_draw = true;
    ExperimentReport r = run_experiment(cfg);
    for (const auto& row : r.points[0].rows) {
        CHECK(std::isfinite(row.slow_sd));
        CHECK(std::isfinite(row.fast_sd));
    }
}

TEST_CASE("epoch sweeps reuse the configured train size") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.sweep_kind = SweepKind::Epochs;
    cfg.sweep_values = {2, 8};
    cfg.n = 24;
    ExperimentReport r = run_experiment(cfg);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].sweep_value == 2);
    CHECK(r.points[1].sweep_value == 8);
    ResultTable t = result_table(r);
    CHECK(t.rows[0][0] == 2.0);
    CHECK(t.rows[1][0] == 8.0);
}

TEST_CASE("result_table lays out the aggregate columns in order") {
    ExperimentReport r;
    SweepPointResult pt;
    pt.sweep_value = 100;
    pt.train_avg = 0.1;
    pt.train_std = 0.01;
    pt.test_avg = 0.2;
    pt.test_std = 0.02;
    pt.slow_avg = 0.3;
    pt.slow_std = 0.03;
    pt.fast_avg = 0.4;
    pt.fast_std = 0.04;
    r.points.push_back(pt);
    ResultTable t = result_table(r);
    REQUIRE(t.rows.size() == 1);
    const auto& row = t.rows[0];
    CHECK(row[0] == 100.0);
    CHECK(row[1] == 0.1);
    CHECK(row[2] == 0.01);
    CHECK(row[3] == 0.2);
    CHECK(row[4] == 0.02);
    CHECK(row[5] == 0.3);
    CHECK(row[6] == 0.03);
    CHECK(row[7] == 0.4);
    CHECK(row[8] == 0.04);
}

TEST_CASE("an empty sweep produces an empty table") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.sweep_values.clear();
    ExperimentReport r = run_experiment(cfg);
    CHECK(r.points.empty());
    ResultTable t = result_table(r);
    CHECK(t.rows.empty());
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg = tiny_experiment();
    CHECK_NOTHROW(cfg.validate());
    cfg.replicas = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg.replicas = 3;
    cfg.sweep_values.push_back(-5);
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg.sweep_values = {24};
    cfg.delta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg.delta = 0.05;
    cfg.lambda = 0.5;  // infeasible with gamma 1.795
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
    cfg.lambda = 1.0 / 2.98;
    cfg.loss_draws = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
}

TEST_CASE("parallel_for visits every index exactly once and rethrows failures") {
    std::vector<std::atomic<int>> hits(257);
    for (auto& h : hits) h = 0;
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);

    CHECK_THROWS_AS(parallel_for(8,
                                 [](std::size_t i) {
                                     if (i == 5) throw InvalidParameter("boom");
                                 }),
                    InvalidParameter);
    CHECK(worker_count() >= 1);
}
