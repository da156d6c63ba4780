#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "reserve_lasso/bootstrap.hpp"
#include "reserve_lasso/synthetic.hpp"

using namespace reserve_lasso;

namespace {

ForecastTotals unit_totals() {
    ForecastTotals t;
    t.reserve = 100.0;
    t.aggregates = {10.0, 20.0, 40.0, 15.0, 30.0, 50.0};
    return t;
}

// Replication whose models all forecast `ratio` times the unit totals, with
// near-equal evidence so every model keeps real posterior mass.
ReplicationResult flat_replication(int b, std::vector<double> ratios) {
    ReplicationResult r;
    r.b = b;
    r.alive = true;
    for (std::size_t q = 0; q < ratios.size(); ++q)
        r.models.push_back({static_cast<int>(q), unit_totals().scaled(ratios[q]), -0.01 * q, 0.1 * q});
    return r;
}

double provisional_mean(const ReplicationResult& r, const PriorSpec& prior) {
    std::vector<ModelEvidence> ev;
    for (const auto& m : r.models) ev.push_back({m.model_id, m.loglik, m.l1});
    const auto post = posterior(ev, prior);
    double m = 0.0;
    for (std::size_t k = 0; k < ev.size(); ++k) m += post.probs[k] * r.models[k].totals.reserve;
    return m;
}

std::vector<BootstrapRow> random_rows(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<BootstrapRow> rows;
    for (int b = 1; b <= count; ++b) {
        BootstrapRow row;
        row.b = b;
        const int n = 5 + static_cast<int>(rng() % 20);
        double total = 0.0;
        for (int q = 0; q < n; ++q) {
            row.model_ids.push_back(q);
            row.reserves.push_back(80.0 + 40.0 * u(rng));
            row.probs.push_back(u(rng) + 1e-3);
            total += row.probs.back();
        }
        PosteriorDistribution post;
        post.model_ids = row.model_ids;
        for (auto& p : row.probs) post.probs.push_back(p /= total);
        const auto s = summarize(post, row.reserves);
        row.mean = s.mean;
        row.cov = s.cov;
        row.s2 = (s.mean * s.cov) * (s.mean * s.cov);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("residual examples") {
    const std::vector<double> mu{1.0, 4.0, 9.0, 2.0};
    const auto zero = residuals(mu, mu, 0.09);
    for (double r : zero.values) CHECK(r == 0.0);
    CHECK(zero.shift == 0.0);
    auto y = mu;
    y[2] = mu[2] * (1.0 + std::sqrt(0.09));
    const auto one = residuals(y, mu, 0.09);
    CHECK(one.shift == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(one.values[2] == Catch::Approx(0.75).epsilon(1e-14));
    for (std::size_t k : {0u, 1u, 3u}) CHECK(one.values[k] == Catch::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("residuals of simulated data are centred with unit spread") {
    const auto spec = preset("dataset1", 40);
    const auto sim = simulate(spec, 31);
    const auto res = residuals(sim.triangle.values(), sim.past_means, spec.dispersion);
    const double mean = std::accumulate(res.values.begin(), res.values.end(), 0.0) / res.values.size();
    CHECK(std::abs(mean) < 1e-12);
    const auto m = oracle::moments(res.values);
    CHECK(m.sd == Catch::Approx(1.0).margin(0.08));
}

TEST_CASE("pseudo data") {
    const std::vector<double> mu{3.0, 5.0, 8.0};
    ResidualSet zero{{0.0, 0.0, 0.0}, 0.0};
    auto rng = make_rng(1, "test");
    const auto same = pseudo_data(mu, 0.09, zero, rng);
    CHECK(same.values == mu);
    CHECK(same.floor_hits == 0);

    const double phi = 0.25;
    const double cutoff = (kPseudoDataFloor - 1.0) / std::sqrt(phi);
    ResidualSet low{{cutoff - 0.01, cutoff + 0.01}, 0.0};
    int hits = 0;
    for (int k = 0; k < 200; ++k) {
        const auto p = pseudo_data(mu, phi, low, rng);
        for (std::size_t c = 0; c < mu.size(); ++c) {
            CHECK(p.values[c] >= kPseudoDataFloor * mu[c] * (1.0 - 1e-12));
            if (p.values[c] == kPseudoDataFloor * mu[c]) ++hits;
        }
        hits -= p.floor_hits;
    }
    CHECK(hits == 0);
}

TEST_CASE("pseudo data is unbiased for the fitted means") {
    const auto spec = preset("dataset2", 6);
    const auto sim = simulate(spec, 2);
    const auto res = residuals(sim.triangle.values(), sim.past_means, spec.dispersion);
    auto rng = make_rng(7, "test");
    const int reps = 10000;
    std::vector<std::vector<double>> cells(sim.past_means.size());
    for (int k = 0; k < reps; ++k) {
        const auto p = pseudo_data(sim.past_means, spec.dispersion, res, rng);
        for (std::size_t c = 0; c < cells.size(); ++c) cells[c].push_back(p.values[c]);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto m = oracle::moments(cells[c]);
        CHECK(std::abs(m.mean - sim.past_means[c]) < 3.0 * m.se);
    }
}

TEST_CASE("identity resample reproduces the primary path") {
    const int side = 10;
    const auto sim = simulate(preset("dataset1", side), 3);
    const auto design = assemble(build_basis(side), past_cells(side));
    const auto region = future_cells(side);
    const auto future = assemble(design.stats, region.cells);
    const std::vector<double> y(sim.triangle.values().begin(), sim.triangle.values().end());

    BootstrapSetup setup;
    setup.design = &design;
    setup.future = &future;
    setup.region = &region;
    setup.phi = 0.09;
    setup.path_length = 30;
    setup.path_ratio = 1e-3;
    const auto rep = run_replication(setup, y, 0);
    REQUIRE(rep.alive);

    const auto path = make_path(lambda_max(design.values, design.penalized(), y), 30, 1e-3);
    const auto fit = fit_path(design.values, design.penalized(), y, path);
    REQUIRE(rep.models.size() == fit.points.size());
    for (std::size_t q = 0; q < fit.points.size(); ++q) {
        const auto f = extrapolate(static_cast<int>(q), fit.points[q].beta, future, region);
        CHECK(rep.models[q].totals.reserve == Catch::Approx(f.totals.reserve).epsilon(1e-5));
        CHECK(rep.models[q].loglik == Catch::Approx(gamma_loglik(y, fit.points[q].fitted, 0.09)).epsilon(1e-10));
    }
}

TEST_CASE("bootstrap replications are seeded per replication") {
    const int side = 8;
    const auto spec = preset("dataset1", side);
    const auto sim = simulate(spec, 3);
    const auto design = assemble(build_basis(side), past_cells(side));
    const auto region = future_cells(side);
    const auto future = assemble(design.stats, region.cells);
    BootstrapSetup setup;
    setup.design = &design;
    setup.future = &future;
    setup.region = &region;
    setup.fitted = sim.past_means;
    setup.phi = spec.dispersion;
    setup.residuals = residuals(sim.triangle.values(), sim.past_means, spec.dispersion);
    setup.path_length = 15;
    setup.path_ratio = 1e-2;
    const auto serial = run_bootstrap(setup, 11, 4, 1);
    const auto parallel = run_bootstrap(setup, 11, 4, 3);
    REQUIRE(serial.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(serial[k].b == static_cast<int>(k) + 1);
        REQUIRE(serial[k].models.size() == parallel[k].models.size());
        for (std::size_t q = 0; q < serial[k].models.size(); ++q)
            CHECK(serial[k].models[q].totals.reserve == parallel[k].models[q].totals.reserve);
    }
    CHECK(serial[0].models.back().totals.reserve != serial[1].models.back().totals.reserve);
}

TEST_CASE("global scale factor") {
    const auto gates = default_gates();
    const auto temp = widen(gates, 1.4);
    const PriorSpec prior{PriorFlavor::onese, 1.0};
    const std::vector<ReplicationResult> centred{flat_replication(1, std::vector<double>(6, 0.95)),
                                                 flat_replication(2, std::vector<double>(6, 1.05))};
    const auto a = assemble(centred, unit_totals(), 100.0, gates, temp, prior);
    CHECK(a.scale_factor == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(a.rows.size() == 2);

    const std::vector<ReplicationResult> low{flat_replication(1, std::vector<double>(6, 0.5)),
                                             flat_replication(2, std::vector<double>(6, 0.5))};
    const auto b = assemble(low, unit_totals(), 100.0, gates, widen(gates, 2.5), prior);
    CHECK(b.scale_factor == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(b.rows.size() == 2);
    for (double r : b.rows[0].reserves) CHECK(r == Catch::Approx(100.0).epsilon(1e-12));

    std::vector<ReplicationResult> mixed;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.8, 1.1);
    for (int k = 1; k <= 6; ++k) {
        std::vector<double> ratios(8);
        for (auto& r : ratios) r = u(rng);
        mixed.push_back(flat_replication(k, ratios));
    }
    double provisional = 0.0;
    for (const auto& r : mixed) provisional += provisional_mean(r, prior);
    provisional /= mixed.size();
    const auto c = assemble(mixed, unit_totals(), 100.0, gates, temp, prior);
    CHECK(c.provisional_mean == Catch::Approx(provisional).epsilon(1e-12));
    CHECK(c.provisional_mean * c.scale_factor == Catch::Approx(100.0).epsilon(1e-10));
    CHECK(static_cast<int>(c.rows.size()) <= c.replications);
}

TEST_CASE("dead and sparse replications") {
    const auto gates = default_gates();
    const auto temp = widen(gates, 1.4);
    const PriorSpec prior{PriorFlavor::onese, 1.0};
    auto dead = flat_replication(3, std::vector<double>(6, 3.0));
    auto failed = flat_replication(4, std::vector<double>(6, 1.0));
    failed.alive = false;
    auto thin = flat_replication(5, std::vector<double>(4, 1.0));
    const std::vector<ReplicationResult> reps{flat_replication(1, std::vector<double>(6, 1.0)), dead, failed, thin};
    const auto m = assemble(reps, unit_totals(), 100.0, gates, temp, prior);
    CHECK(m.replications == 4);
    CHECK(m.dead == 2);
    CHECK(m.sparse == 1);
    REQUIRE(m.rows.size() == 1);
    CHECK(m.rows[0].b == 1);
    CHECK(m.temporary_censored[0] == 6);
    CHECK(m.q_max() == 6);

    const std::vector<ReplicationResult> none{dead, failed};
    CHECK_THROWS_AS(assemble(none, unit_totals(), 100.0, gates, temp, prior), InvalidInput);
}

TEST_CASE("final gates act after rescaling") {
    const auto gates = default_gates();
    const PriorSpec prior{PriorFlavor::onese, 1.0};
    // one outlier model per row; after rescaling by ~1 it fails the final AQ2 gate
    std::vector<double> ratios(7, 1.0);
    ratios[6] = 1.45;
    const std::vector<ReplicationResult> reps{flat_replication(1, ratios), flat_replication(2, ratios)};
    const auto m = assemble(reps, unit_totals(), provisional_mean(reps[0], prior), gates, widen(gates, 1.4), prior);
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0].model_ids.size() == 6);
    double total = 0.0;
    for (double p : m.rows[0].probs) total += p;
    CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("decomposition arithmetic") {
    const auto d = combine(0.019, 0.092, 0.039);
    CHECK(std::round(d.w_pa_imse * 1000.0) / 10.0 == Catch::Approx(9.4).margin(0.05));
    CHECK(std::round(d.w_subtotal * 1000.0) / 10.0 == Catch::Approx(10.2).margin(0.05));
    CHECK(combine(0.0, 0.0, 0.0).w_subtotal == 0.0);
    CHECK(d.w_pa_imse * d.w_pa_imse == Catch::Approx(0.092 * 0.092 + 0.019 * 0.019).epsilon(1e-12));

    auto rows = random_rows(3, 1);
    rows[1] = rows[0];
    rows[2] = rows[0];
    rows[1].b = 2;
    rows[2].b = 3;
    const auto same = decompose(rows, 0.0);
    CHECK(same.s2_pa == Catch::Approx(0.0).margin(1e-18));
    CHECK(same.w_pa == Catch::Approx(0.0).margin(1e-9));
    CHECK_THROWS_AS(decompose(std::span<const BootstrapRow>(rows.data(), 1), 0.0), InvalidInput);
}

TEST_CASE("law of total variance and permutation invariance") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto rows = random_rows(2 + static_cast<int>(seed), seed);
        const auto d = decompose(rows, 0.05);
        std::vector<oracle::WeightedRow> pooled;
        for (const auto& r : rows) pooled.push_back({r.reserves, r.probs});
        const double direct = oracle::pooled_variance(pooled);
        CHECK(std::abs(d.s2_pa + d.s2_imse - direct) <= 1e-10 * direct);
        CHECK(d.w_pa_imse * d.w_pa_imse == Catch::Approx(d.w_pa * d.w_pa + d.w_imse * d.w_imse).epsilon(1e-12));
        CHECK(d.w_subtotal * d.w_subtotal == Catch::Approx(d.w_pa_imse * d.w_pa_imse + 0.05 * 0.05).epsilon(1e-12));
        CHECK(d.n_surviving == static_cast<int>(rows.size()));
        std::mt19937_64 rng(seed);
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto again = decompose(rows, 0.05);
        CHECK(again.m == d.m);
        CHECK(again.s2_pa == d.s2_pa);
        CHECK(again.s2_imse == d.s2_imse);
    }
}

TEST_CASE("process error") {
    const double phi = 0.09;
    const int sims = 100000;
    const double single = process_error(std::vector<double>{50.0}, phi, sims, 1);
    const double kurtosis = 3.0 + 6.0 * phi;
    const double se = std::sqrt(phi) * std::sqrt((kurtosis - 1.0) / (4.0 * sims));
    CHECK(std::abs(single - std::sqrt(phi)) < 3.0 * se);

    const int n = 16;
    const double many = process_error(std::vector<double>(n, 50.0), phi, sims, 2);
    const double se_n = std::sqrt(phi / n) * std::sqrt((2.0 + 6.0 * phi / n) / (4.0 * sims));
    CHECK(std::abs(many - std::sqrt(phi / n)) < 3.0 * se_n);

    CHECK(process_error(std::vector<double>{50.0, 20.0}, 1e-12, 2000, 3) < 1e-5);
    CHECK(process_error(std::vector<double>{5.0, 2.0}, phi, 500, 9) == process_error(std::vector<double>{5.0, 2.0}, phi, 500, 9));
}
