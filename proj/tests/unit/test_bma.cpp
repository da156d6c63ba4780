#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "reserve_lasso/bma.hpp"

using namespace reserve_lasso;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

std::vector<ModelEvidence> two_models(double delta, double d) {
    return {{0, 0.0, 1.0}, {1, delta, 1.0 + d}};
}

// Likelihood rises and l1 rises along the path, with concave gains so every
// model is the mode somewhere.
std::vector<ModelEvidence> toy_path(int count) {
    std::vector<ModelEvidence> m;
    for (int q = 0; q < count; ++q) m.push_back({q, 30.0 * std::log1p(q), 2.0 * q});
    return m;
}

}  // namespace

TEST_CASE("Gamma log-likelihood") {
    const std::vector<double> one{1.0};
    CHECK(gamma_loglik(one, one, 1.0) == Catch::Approx(-1.0).margin(1e-15));
    for (double mu : {0.7, 3.0, 40.0})
        for (double phi : {0.01, 0.09, 0.5}) {
            const double total = oracle::simpson(
                [&](double y) { return y <= 0.0 ? 0.0 : std::exp(gamma_loglik(std::vector<double>{y}, std::vector<double>{mu}, phi)); },
                0.0, mu * (1.0 + 60.0 * std::sqrt(phi)), 40000);
            CHECK(total == Catch::Approx(1.0).margin(1e-6));
            for (double y : {0.5 * mu, mu, 1.7 * mu})
                CHECK(std::exp(gamma_loglik(std::vector<double>{y}, std::vector<double>{mu}, phi)) ==
                      Catch::Approx(oracle::gamma_pdf(y, mu, phi)).epsilon(1e-10));
        }
    const double y = 2.5;
    const double best = oracle::grid_argmin(
        [&](double mu) { return -gamma_loglik(std::vector<double>{y}, std::vector<double>{mu}, 0.2); }, 0.5, 10.0, 2001);
    CHECK(best == Catch::Approx(y).epsilon(1e-6));
    CHECK_THROWS_AS(gamma_loglik(std::vector<double>{0.0}, one, 1.0), InvalidInput);
    CHECK_THROWS_AS(gamma_loglik(one, one, 0.0), InvalidInput);
}

TEST_CASE("log prior and l1") {
    const std::vector<bool> pen{false, true, true};
    Eigen::VectorXd beta(3);
    beta << 7.0, 0.5, -0.5;
    CHECK(l1_norm(beta, pen) == 1.0);
    CHECK(log_prior(0.0, 2.0) == 0.0);
    CHECK(log_prior(l1_norm(beta, pen), 2.0) == -2.0);
    CHECK(log_prior(1.3, 4.0) == 2.0 * log_prior(1.3, 2.0));
}

TEST_CASE("Laplace density moments") {
    for (double lambda : {0.5, 1.0, 4.0}) {
        const double edge = 60.0 / lambda;
        auto f = [&](double x) { return laplace_density(x, lambda); };
        // split at the kink so Simpson sees smooth pieces
        const double mass = oracle::simpson(f, -edge, 0.0, 20000) + oracle::simpson(f, 0.0, edge, 20000);
        const double var = oracle::simpson([&](double x) { return x * x * f(x); }, -edge, 0.0, 20000) +
                           oracle::simpson([&](double x) { return x * x * f(x); }, 0.0, edge, 20000);
        CHECK(mass == Catch::Approx(1.0).margin(1e-6));
        CHECK(var == Catch::Approx(2.0 / (lambda * lambda)).epsilon(1e-6));
    }
}

TEST_CASE("posterior examples") {
    const std::vector<ModelEvidence> single{{3, -10.0, 2.0}};
    const auto one = posterior(single, {PriorFlavor::onese, 1.0});
    CHECK(one.probs == std::vector<double>{1.0});
    CHECK(one.model_ids == std::vector<int>{3});

    const std::vector<ModelEvidence> pair{{0, -5.0, 1.0}, {1, -5.0, 2.0}};
    const auto p = posterior(pair, {PriorFlavor::custom, std::log(4.0)});
    CHECK(p.probs[0] == Catch::Approx(0.8).margin(1e-12));
    CHECK(p.probs[1] == Catch::Approx(0.2).margin(1e-12));
    const auto flat = posterior(pair, {PriorFlavor::custom, 1e-14});
    CHECK(flat.probs[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK_THROWS_AS(posterior(std::vector<ModelEvidence>{}, {}), InvalidInput);
}

TEST_CASE("posterior normalization and shift invariance") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ll(-3000.0, -2000.0);
    std::uniform_real_distribution<double> l1(0.0, 40.0);
    std::uniform_real_distribution<double> lg(-6.0, 6.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ModelEvidence> m;
        for (int q = 0; q < 1 + trial % 60; ++q) m.push_back({q, ll(rng), l1(rng)});
        const PriorSpec prior{PriorFlavor::custom, std::exp(lg(rng))};
        const auto post = posterior(m, prior);
        double total = 0.0;
        for (double v : post.probs) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        auto shifted = m;
        for (auto& e : shifted) e.loglik += 12345.678;
        const auto again = posterior(shifted, prior);
        for (std::size_t k = 0; k < m.size(); ++k) CHECK(again.probs[k] == Catch::Approx(post.probs[k]).margin(1e-12));
    }
}

TEST_CASE("mode crossover of two models") {
    const double delta = 6.0, d = 1.5;
    const auto m = two_models(delta, d);
    const auto simple = mode_interval(m, 0);
    const auto complex = mode_interval(m, 1);
    CHECK(simple.lower == Catch::Approx(delta / d).epsilon(1e-12));
    CHECK(complex.upper == Catch::Approx(delta / d).epsilon(1e-12));
    const double to_simple = calibrate_lambda_g(m, 0);
    const double to_complex = calibrate_lambda_g(m, 1);
    CHECK(to_simple > delta / d);
    CHECK(to_complex <= delta / d);
    CHECK(to_simple == Catch::Approx(std::sqrt(delta / d * kLambdaGMax)).epsilon(1e-6));
    CHECK(to_complex == Catch::Approx(std::sqrt(delta / d * kLambdaGMin)).epsilon(1e-6));
    const auto at_simple = posterior(m, {PriorFlavor::onese, to_simple});
    CHECK(at_simple.probs[0] > at_simple.probs[1]);
}

TEST_CASE("calibration is monotone in target complexity") {
    const auto m = toy_path(8);
    double previous = kLambdaGMax * 2.0;
    for (int q = 0; q < 8; ++q) {
        const double lg = calibrate_lambda_g(m, q);
        CHECK(lg <= previous);
        previous = lg;
        const auto post = posterior(m, {PriorFlavor::custom, lg});
        const auto top = std::max_element(post.probs.begin(), post.probs.end()) - post.probs.begin();
        CHECK(top == q);
    }
}

TEST_CASE("unattainable modes name the nearest attainable ones") {
    // model 1 is dominated: never strictly best at any lambda
    const std::vector<ModelEvidence> m{{0, 0.0, 0.0}, {1, 1.0, 2.0}, {2, 4.0, 3.0}};
    CHECK_FALSE(mode_interval(m, 1).attainable());
    try {
        calibrate_lambda_g(m, 1);
        FAIL("expected UnattainableMode");
    } catch (const UnattainableMode& e) {
        CHECK(e.target() == 1);
        CHECK(e.nearest() == std::vector<int>{0, 2});
    }
}

TEST_CASE("extreme lambda on two models matches the closed form") {
    const double delta = 20.0, d = 2.0, eps = 0.0005;
    const auto m = two_models(delta, d);
    const auto simple = find_extreme_lambda(m, ExtremeSide::simple, 1, eps);
    REQUIRE(simple.has_value());
    CHECK(*simple == Catch::Approx((delta - logit(eps)) / d).epsilon(1e-6));
    const auto complex = find_extreme_lambda(m, ExtremeSide::complex, 0, eps);
    REQUIRE(complex.has_value());
    CHECK(*complex == Catch::Approx((delta + logit(eps)) / d).epsilon(1e-6));
    CHECK(tail_mass(posterior(m, {PriorFlavor::simple, *simple}), ExtremeSide::simple, 1) == Catch::Approx(eps).epsilon(1e-6));

    const std::vector<ModelEvidence> single{{0, 1.0, 1.0}};
    CHECK_FALSE(find_extreme_lambda(single, ExtremeSide::simple, 0).has_value());
    CHECK_FALSE(find_extreme_lambda(single, ExtremeSide::complex, 0).has_value());
}

TEST_CASE("simple extreme exceeds the calibrated prior") {
    const auto m = toy_path(10);
    const int q_1se = 4;
    const auto simple = find_extreme_lambda(m, ExtremeSide::simple, q_1se);
    REQUIRE(simple.has_value());
    CHECK(*simple > calibrate_lambda_g(m, q_1se));
    const auto complex = find_extreme_lambda(m, ExtremeSide::complex, 6);
    REQUIRE(complex.has_value());
    CHECK(*complex < calibrate_lambda_g(m, 6));
}

TEST_CASE("upper tail mass falls as lambda grows") {
    const auto m = toy_path(12);
    for (int q0 = 1; q0 < 12; q0 += 3) {
        double previous = 2.0;
        for (double lg = 1e-3; lg < 1e3; lg *= 1.5) {
            const double mass = tail_mass(posterior(m, {PriorFlavor::custom, lg}), ExtremeSide::simple, q0);
            CHECK(mass <= previous + 1e-15);
            previous = mass;
        }
    }
}

TEST_CASE("posterior summaries") {
    PosteriorDistribution point;
    point.model_ids = {0};
    point.probs = {1.0};
    const auto s0 = summarize(point, std::vector<double>{50.0});
    CHECK(s0.variance == 0.0);
    CHECK(s0.cov == 0.0);

    PosteriorDistribution two;
    two.model_ids = {0, 1};
    two.probs = {0.5, 0.5};
    const auto s = summarize(two, std::vector<double>{90.0, 110.0});
    CHECK(s.mean == Catch::Approx(100.0).epsilon(1e-15));
    CHECK(s.variance == Catch::Approx(100.0).epsilon(1e-13));
    CHECK(s.cov == Catch::Approx(0.1).epsilon(1e-13));
    CHECK_THROWS_AS(summarize(two, std::vector<double>{-90.0, 10.0}), InvalidInput);
    CHECK_THROWS_AS(summarize(two, std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("posterior summary matches resampling") {
    const auto m = toy_path(15);
    const auto post = posterior(m, {PriorFlavor::custom, 3.0});
    std::vector<double> reserves;
    for (int q = 0; q < 15; ++q) reserves.push_back(100.0 + 7.0 * q + 3.0 * std::sin(q));
    const auto s = summarize(post, reserves);
    std::mt19937_64 rng(99);
    std::discrete_distribution<int> pick(post.probs.begin(), post.probs.end());
    const int draws = 1000000;
    std::vector<double> sample(draws), squares(draws);
    for (int k = 0; k < draws; ++k) {
        sample[k] = reserves[pick(rng)];
        squares[k] = (sample[k] - s.mean) * (sample[k] - s.mean);
    }
    const auto mm = oracle::moments(sample);
    const auto mv = oracle::moments(squares);
    CHECK(std::abs(mm.mean - s.mean) < 3.0 * mm.se);
    CHECK(std::abs(mv.mean - s.variance) < 3.0 * mv.se);
}

TEST_CASE("flavor names") {
    CHECK(flavor_name(PriorFlavor::onese) == "1se");
    for (auto f : {PriorFlavor::simple, PriorFlavor::onese, PriorFlavor::mincv, PriorFlavor::complex, PriorFlavor::custom})
        CHECK(parse_flavor(flavor_name(f)) == f);
    CHECK_THROWS_AS(parse_flavor("median"), InvalidInput);
}
