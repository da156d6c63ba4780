#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "reserve_lasso/basis.hpp"
#include "reserve_lasso/error.hpp"
#include "reserve_lasso/forecast.hpp"
#include "reserve_lasso/glm_benchmark.hpp"
#include "reserve_lasso/synthetic.hpp"

using namespace reserve_lasso;

namespace {

struct Setup {
    DesignMatrix past;
    ForecastRegion region;
    DesignMatrix future;
};

Setup setup(int side) {
    Setup s{assemble(build_basis(side), past_cells(side)), future_cells(side), {}};
    s.future = assemble(s.past.stats, s.region.cells);
    return s;
}

Eigen::Index column_of(const DesignMatrix& d, const BasisFunction& fn) {
    const auto it = std::find(d.stats.columns.begin(), d.stats.columns.end(), fn);
    REQUIRE(it != d.stats.columns.end());
    return it - d.stats.columns.begin();
}

}  // namespace

TEST_CASE("intercept-only forecast") {
    const auto s = setup(9);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.past.cols()));
    beta[0] = 1.25;
    const auto f = extrapolate(4, beta, s.future, s.region);
    CHECK(f.model_id == 4);
    for (double v : f.cell_forecasts) CHECK(v == Catch::Approx(std::exp(1.25)).epsilon(1e-15));
    CHECK(f.totals.reserve == Catch::Approx(36.0 * std::exp(1.25)).epsilon(1e-14));
    CHECK_FALSE(f.totals.delinquent);
}

TEST_CASE("positive payment-period ramp keeps growing along future diagonals") {
    const auto s = setup(10);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.past.cols()));
    beta[0] = 0.5;
    beta[column_of(s.past, {BasisKind::ramp_t, 7, 0})] = 0.3;
    const auto f = extrapolate(0, beta, s.future, s.region);
    for (std::size_t a = 0; a < s.region.size(); ++a)
        for (std::size_t b = 0; b < s.region.size(); ++b) {
            const auto& ca = s.region.cells[a];
            const auto& cb = s.region.cells[b];
            if (cb.t() > ca.t()) CHECK(f.cell_forecasts[b] > f.cell_forecasts[a]);
            if (cb.t() == ca.t()) CHECK(f.cell_forecasts[b] == Catch::Approx(f.cell_forecasts[a]).epsilon(1e-13));
        }
}

TEST_CASE("overflowing extrapolation is delinquent") {
    const auto s = setup(10);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.past.cols()));
    beta[column_of(s.past, {BasisKind::ramp_t, 8, 0})] = 1e4;
    const auto f = extrapolate(0, beta, s.future, s.region);
    CHECK(f.totals.delinquent);
    CHECK(std::isinf(f.totals.reserve));
}

TEST_CASE("aggregates are the stated subsets of the future cells") {
    const int side = 14;
    const auto region = future_cells(side);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::vector<double> cells(region.size());
    for (auto& v : cells) v = u(rng);
    const auto totals = summarize_forecast(region, cells);
    double all = 0.0;
    std::array<double, 6> expected{};
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& c = region.cells[k];
        all += cells[k];
        const int spans[3] = {2, 5, 10};
        for (int s = 0; s < 3; ++s) {
            if (c.i >= side - spans[s] + 1) expected[s] += cells[k];
            if (c.t() >= side + 1 && c.t() <= side + spans[s]) expected[3 + s] += cells[k];
        }
    }
    CHECK(totals.reserve == Catch::Approx(all).epsilon(1e-14));
    for (std::size_t a = 0; a < 6; ++a) CHECK(totals.aggregates[a] == Catch::Approx(expected[a]).epsilon(1e-14));
    CHECK(totals[Aggregate::aq10] <= totals.reserve);
    CHECK(totals[Aggregate::aq2] <= totals[Aggregate::aq5]);
    CHECK(totals[Aggregate::pq2] <= totals[Aggregate::pq10]);
    CHECK(aggregate_name(Aggregate::aq10) == "AQ10");
    CHECK(aggregate_name(Aggregate::pq2) == "PQ2");

    const auto doubled = totals.scaled(2.0);
    CHECK(doubled.reserve == 2.0 * totals.reserve);
    CHECK(doubled[Aggregate::pq5] == 2.0 * totals[Aggregate::pq5]);
}

TEST_CASE("forecast is a pure function of the coefficients") {
    const auto s = setup(8);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.past.cols()));
    beta[0] = 2.0;
    for (int k = 0; k < 10; ++k) beta[1 + static_cast<Eigen::Index>(rng() % (s.past.cols() - 1))] = 0.05 * n01(rng);
    const auto a = extrapolate(1, beta, s.future, s.region);
    const auto b = extrapolate(1, beta, s.future, s.region);
    CHECK(a.cell_forecasts == b.cell_forecasts);
    CHECK(a.totals.aggregates == b.totals.aggregates);
    const auto raw = destandardize(s.past.stats, beta);
    for (std::size_t k = 0; k < s.region.size(); ++k)
        CHECK(a.cell_forecasts[k] == Catch::Approx(std::exp(raw_predictor(s.past.stats, raw, s.region.cells[k]))).epsilon(1e-8));
}

TEST_CASE("true structure on noiseless data forecasts the true reserve") {
    for (const char* name : {"dataset1", "dataset3"}) {
        auto spec = preset(name, 20);
        spec.dispersion = 1e-6;
        const auto sim = simulate(spec, 6);
        const auto glm = fit_true_glm(spec, sim.triangle.values());
        CHECK(std::abs(glm.totals.reserve / sim.true_reserve - 1.0) < 0.005);
    }
}

TEST_CASE("forecast csv and size checks") {
    const auto region = future_cells(3);
    const std::vector<double> cells{1.0, 2.5, 3.0};
    std::ostringstream out;
    write_forecast_csv(out, region, cells);
    CHECK(out.str() == "i,j,forecast\n2,3,1\n3,2,2.5\n3,3,3\n");
    CHECK_THROWS_AS(summarize_forecast(region, std::vector<double>{1.0}), InvalidInput);
    const auto s = setup(5);
    CHECK_THROWS_AS(extrapolate(0, Eigen::VectorXd::Zero(3), s.future, s.region), InvalidInput);
}
