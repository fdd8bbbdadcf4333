#include <doctest.h>

#include <cibound/bounds.hpp>
#include <cibound/discrete.hpp>
#include <cibound/errors.hpp>
#include <cibound/gaussian.hpp>
#include <cibound/random.hpp>
#include <cibound/subset.hpp>
#include <cibound/toys.hpp>
#include <cibound/verify.hpp>

#include <cmath>
#include <vector>

using namespace cibound;
using cibound::toys::SubsetMemorizerToy;
using cibound::toys::ThresholdToy;

TEST_CASE("MomentEstimate acceptance rule") {
    MomentEstimate exact;
    exact.estimate = 1.0 + 5e-10;
    exact.exact = true;
    CHECK(exact.holds());
    exact.estimate = 1.0 + 1e-8;
    CHECK_FALSE(exact.holds());

    MomentEstimate mc;
    mc.estimate = 1.05;
    mc.std_error = 0.02;
    mc.exact = false;
    CHECK(mc.holds());  // 1.05 <= 1 + 3*0.02
    mc.std_error = 0.01;
    CHECK_FALSE(mc.holds());
}

TEST_CASE("zero loss makes the fast moment exactly one") {
    // With test == train == 0 the exponent vanishes for every (mask, w), so
    // the enumerated expectation is a sum of q(w) over masks: exactly 1.
    auto lrn = toys::constant_learner({0.25, 0.75}, [](long, const Instance&) { return 0.0; });
    auto ss = toys::index_supersample(5);
    BoundParams params;
    params.n = 5;
    auto est = exact_moment_fast(lrn, ss, params);
    CHECK(est.exact);
    CHECK(est.std_error == 0.0);
    CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.holds());
}

TEST_CASE("zero loss makes the slow moment exactly 1/sqrt(n)") {
    auto lrn = toys::constant_learner({1.0}, [](long, const Instance&) { return 0.0; });
    for (long n : {4L, 9L}) {
        auto ss = toys::index_supersample(n);
        auto est = exact_moment_slow(lrn, ss);
        CHECK(est.estimate ==
              doctest::Approx(1.0 / std::sqrt(static_cast<double>(n))).epsilon(1e-12));
        CHECK(est.holds());
    }
}

TEST_CASE("zero loss makes the interpolating moment exactly one") {
    auto lrn = toys::constant_learner({0.5, 0.5}, [](long, const Instance&) { return 0.0; });
    auto ss = toys::index_supersample(4);
    auto est = exact_moment_interp(lrn, ss);
    CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact fast moment holds on the threshold toy") {
    ThresholdToy toy;
    RandomStream rng(81u);
    BoundParams params;
    params.n = 8;
    for (int rep = 0; rep < 5; ++rep) {
        auto ss = toy.draw(8, rng);
        auto est = exact_moment_fast(toy.learner(), ss, params);
        CHECK(est.exact);
        CHECK(est.holds());
        CHECK(est.estimate > 0.0);
    }
}

TEST_CASE("exact fast moment holds for a data-dependent constant posterior") {
    // Posterior equal to the true marginal (a constant in the mask): the
    // exponent is the only term left and the expectation stays <= 1.
    RandomStream rng(82u);
    ThresholdToy toy;
    auto base = toy.learner();
    for (long n : {4L, 8L, 10L}) {
        auto ss = toy.draw(n, rng);
        auto marginal = enumerate_marginal(base, ss);
        DiscreteLearner constant = toys::constant_learner(
            marginal, [base](long w, const Instance& z) { return base.loss(w, z); });
        BoundParams params;
        params.n = n;
        auto est = exact_moment_fast(constant, ss, params);
        CHECK(est.holds());
    }
}

TEST_CASE("exact slow moment holds on the threshold toy") {
    ThresholdToy toy;
    RandomStream rng(83u);
    for (int rep = 0; rep < 5; ++rep) {
        auto ss = toy.draw(8, rng);
        auto est = exact_moment_slow(toy.learner(), ss);
        CHECK(est.holds());
    }
}

TEST_CASE("exact interpolating moment holds on the subset memorizer") {
    SubsetMemorizerToy toy;
    RandomStream rng(84u);
    for (int rep = 0; rep < 5; ++rep) {
        auto ss = toy.draw(8, rng);
        auto est = exact_moment_interp(toy.learner(), ss);
        CHECK(est.holds());
        CHECK(est.estimate > 0.0);
    }
}

TEST_CASE("exact interpolating moment is exactly one for the mask memorizer") {
    // Test loss is identically 1 and q is uniform over 2^n hypotheses, so the
    // sum telescopes to exactly one.
    for (long n : {2L, 4L, 6L}) {
        auto lrn = toys::mask_memorizer(n);
        auto ss = toys::index_supersample(n);
        auto est = exact_moment_interp(lrn, ss);
        CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(est.holds());
    }
}

TEST_CASE("interpolation violations are detected") {
    ThresholdToy toy;  // softmax posterior keeps mass on imperfect hypotheses
    RandomStream rng(85u);
    auto ss = toy.draw(6, rng);
    CHECK_THROWS_AS(exact_moment_interp(toy.learner(), ss), InterpolationViolation);

    auto marginal = enumerate_marginal(toy.learner(), ss);
    RandomStream mc(86u);
    CHECK_THROWS_AS(
        mc_moment_interp_discrete(toy.learner(), ss, marginal, 100, mc),
        InterpolationViolation);
}

TEST_CASE("monte-carlo fast moment agrees with the guarantee on the threshold toy") {
    ThresholdToy toy;
    RandomStream rng(87u);
    auto ss = toy.draw(8, rng);
    auto prior = enumerate_marginal(toy.learner(), ss);
    BoundParams params;
    params.n = 8;
    RandomStream mc(88u);
    auto est = mc_moment_fast_discrete(toy.learner(), ss, prior, params, 20000, mc);
    CHECK_FALSE(est.exact);
    CHECK(est.std_error > 0.0);
    CHECK(est.holds());
    // And it should be consistent with full enumeration.
    auto exact = exact_moment_fast(toy.learner(), ss, params);
    CHECK(std::fabs(est.estimate - exact.estimate) <= 4.0 * est.std_error + 1e-9);
}

TEST_CASE("monte-carlo interp moment holds on the subset memorizer") {
    SubsetMemorizerToy toy;
    RandomStream rng(89u);
    auto ss = toy.draw(8, rng);
    auto prior = enumerate_marginal(toy.learner(), ss);
    RandomStream mc(90u);
    auto est = mc_moment_interp_discrete(toy.learner(), ss, prior, 20000, mc);
    CHECK(est.holds());
    auto exact = exact_moment_interp(toy.learner(), ss);
    CHECK(std::fabs(est.estimate - exact.estimate) <= 4.0 * est.std_error + 1e-9);
}

TEST_CASE("monte-carlo results do not depend on the parent stream's consumed state") {
    ThresholdToy toy;
    RandomStream rng(91u);
    auto ss = toy.draw(6, rng);
    auto prior = enumerate_marginal(toy.learner(), ss);
    BoundParams params;
    params.n = 6;
    RandomStream fresh(99u);
    RandomStream drained(99u);
    for (int i = 0; i < 37; ++i) drained.bits();
    auto a = mc_moment_fast_discrete(toy.learner(), ss, prior, params, 500, fresh);
    auto b = mc_moment_fast_discrete(toy.learner(), ss, prior, params, 500, drained);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("gaussian monte-carlo fast moment holds for a data-blind posterior") {
    // Posterior and prior coincide, so the density-ratio term drops out and
    // the moment reduces to the raw exponential inequality.
    GaussianScenario sc;
    sc.n = 6;
    sc.draw_supersample = [](RandomStream& rng) {
        Supersample ss;
        ss.n = 6;
        for (int i = 0; i < 12; ++i) {
            Instance it;
            int label = rng.bernoulli() ? 1 : 0;
            it.x = {rng.normal() + (label == 1 ? 1.0 : -1.0)};
            it.label = label;
            ss.samples.push_back(it);
        }
        return ss;
    };
    sc.posterior = [](const Supersample&, const Mask&) {
        IsotropicGaussian g;
        g.mean = {0.0};
        g.sigma = 1.0;
        return g;
    };
    sc.prior = [](const Supersample&) {
        IsotropicGaussian g;
        g.mean = {0.0};
        g.sigma = 1.0;
        return g;
    };
    sc.loss = [](const std::vector<double>& w, const Instance& z) {
        int pred = z.x[0] >= w[0] ? 1 : 0;
        return pred == z.label ? 0.0 : 1.0;
    };
    BoundParams params;
    params.n = 6;
    RandomStream rng(92u);
    auto est = mc_moment_fast_gaussian(sc, params, 20000, rng);
    CHECK(est.holds());
    RandomStream rng2(93u);
    auto slow = mc_moment_slow_gaussian(sc, 20000, rng2);
    CHECK(slow.holds());
}

TEST_CASE("tail coverage counts violations and tail_slack matches the formula") {
    RandomStream rng(94u);
    // Bound 0.5 against loss alternating deterministically via the stream.
    auto sampler = [](RandomStream& r) {
        TailTrial t;
        t.bound = 0.5;
        t.loss = r.uniform();  // exceeds 0.5 with probability 1/2
        return t;
    };
    double rate = tail_coverage(sampler, 4000, rng);
    CHECK(std::fabs(rate - 0.5) < 0.04);

    CHECK(tail_slack(0.05, 2000) ==
          doctest::Approx(3.0 * std::sqrt(0.05 * 0.95 / 2000.0)).epsilon(1e-12));

    // Never-violated sampler gives rate zero.
    RandomStream rng2(95u);
    auto safe = [](RandomStream&) { return TailTrial{2.0, 1.0}; };
    CHECK(tail_coverage(safe, 200, rng2) == 0.0);
}

TEST_CASE("fast-rate tail sampler violates its bound rarely") {
    ThresholdToy toy;
    BoundParams params;
    params.n = 8;
    params.delta = 0.05;
    auto sampler = toys::fast_tail_sampler(toy, 8, params);
    RandomStream rng(96u);
    double rate = tail_coverage(sampler, 500, rng);
    CHECK(rate <= 0.05 + tail_slack(0.05, 500));
}

TEST_CASE("interp tail sampler violates its bound rarely") {
    auto sampler = toys::interp_tail_sampler(8, 0.05);
    RandomStream rng(97u);
    double rate = tail_coverage(sampler, 500, rng);
    CHECK(rate <= 0.05 + tail_slack(0.05, 500));
}

TEST_CASE("sample_categorical matches the distribution") {
    std::vector<double> p{0.1, 0.6, 0.3};
    RandomStream rng(98u);
    std::vector<long> counts(3, 0);
    const int trials = 30000;
    for (int i = 0; i < trials; ++i) {
        long w = sample_categorical(p, rng);
        REQUIRE(w >= 0);
        REQUIRE(w < 3);
        ++counts[static_cast<std::size_t>(w)];
    }
    for (std::size_t k = 0; k < 3; ++k) {
        double rate = static_cast<double>(counts[k]) / trials;
        CHECK(std::fabs(rate - p[k]) < 0.015);
    }
}
