#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "reserve_lasso/error.hpp"
#include "reserve_lasso/gates.hpp"

using namespace reserve_lasso;

namespace {

ForecastTotals totals_with(std::array<double, 6> aggregates) {
    ForecastTotals t;
    t.aggregates = aggregates;
    t.reserve = 100.0;
    return t;
}

ForecastTotals primary_totals() { return totals_with({10.0, 20.0, 40.0, 15.0, 30.0, 50.0}); }

ForecastTotals with_ratios(const ForecastTotals& primary, std::array<double, 6> ratios) {
    ForecastTotals t = primary;
    for (std::size_t a = 0; a < 6; ++a) t.aggregates[a] *= ratios[a];
    return t;
}

}  // namespace

TEST_CASE("default gates") {
    const auto g = default_gates();
    CHECK(g[Aggregate::aq2].lower == 0.75);
    CHECK(g[Aggregate::aq2].upper == 1.33);
    CHECK(g[Aggregate::aq5].lower == 0.80);
    CHECK(g[Aggregate::aq5].upper == 1.25);
    CHECK(g[Aggregate::aq10].lower == 0.83);
    CHECK(g[Aggregate::aq10].upper == 1.20);
    CHECK(g[Aggregate::pq2].lower == 0.91);
    CHECK(g[Aggregate::pq2].upper == 1.10);
    CHECK(g[Aggregate::pq5].lower == 0.87);
    CHECK(g[Aggregate::pq5].upper == 1.15);
    CHECK(g[Aggregate::pq10].lower == 0.83);
    CHECK(g[Aggregate::pq10].upper == 1.20);
    for (std::size_t a = 0; a < 6; ++a) CHECK(g.gates[a].aggregate == kAllAggregates[a]);
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("widening") {
    const auto g = default_gates();
    const auto w = widen(g, 1.1);
    CHECK(w[Aggregate::aq2].lower == 0.68);
    CHECK(w[Aggregate::aq2].upper == 1.46);
    const auto same = widen(g, 1.0);
    for (std::size_t a = 0; a < 6; ++a) {
        CHECK(same.gates[a].lower == g.gates[a].lower);
        CHECK(same.gates[a].upper == g.gates[a].upper);
    }
    const auto t = widen(g, 1.4);
    CHECK(t[Aggregate::pq2].lower == 0.65);
    CHECK(t[Aggregate::pq2].upper == 1.54);
    CHECK_THROWS_AS(widen(g, 0.9), InvalidInput);
}

TEST_CASE("gate check examples") {
    const auto g = default_gates();
    const auto p = primary_totals();
    const auto self = gate_check(p, p, g);
    CHECK(self.pass);
    for (double r : self.ratios) CHECK(r == 1.0);

    const auto far = gate_check(with_ratios(p, {1, 1, 1.56, 1, 1, 1}), p, g);
    CHECK_FALSE(far.pass);
    CHECK_FALSE(far.passed[static_cast<std::size_t>(Aggregate::aq10)]);
    CHECK(far.ratios[static_cast<std::size_t>(Aggregate::aq10)] == Catch::Approx(1.56));
    int failing = 0;
    for (bool ok : far.passed) failing += ok ? 0 : 1;
    CHECK(failing == 1);

    std::array<double, 6> uppers{}, lowers{};
    for (std::size_t a = 0; a < 6; ++a) {
        uppers[a] = g.gates[a].upper;
        lowers[a] = g.gates[a].lower;
    }
    CHECK(gate_check(with_ratios(p, uppers), p, g).pass);
    CHECK(gate_check(with_ratios(p, lowers), p, g).pass);
    auto over = uppers;
    over[3] *= 1.0 + 1e-9;
    CHECK_FALSE(gate_check(with_ratios(p, over), p, g).pass);
}

TEST_CASE("degenerate inputs fail the gates") {
    const auto g = default_gates();
    const auto p = primary_totals();
    auto bad = p;
    bad.delinquent = true;
    CHECK_FALSE(gate_check(bad, p, g).pass);
    auto zero = p;
    zero.aggregates[0] = 0.0;
    const auto r = gate_check(p, zero, g);
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.passed[0]);
}

TEST_CASE("widening never removes a passing model and scaling is irrelevant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ratio(0.6, 1.6);
    std::uniform_real_distribution<double> factor(1.0, 2.0);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    const auto g = default_gates();
    const auto p = primary_totals();
    for (int k = 0; k < 2000; ++k) {
        std::array<double, 6> r{};
        for (auto& v : r) v = ratio(rng);
        const auto c = with_ratios(p, r);
        const bool base = gate_check(c, p, g).pass;
        const double f = factor(rng);
        if (base) CHECK(gate_check(c, p, widen(g, f)).pass);
        const double s = scale(rng);
        CHECK(gate_check(c.scaled(s), p.scaled(s), g).pass == base);
    }
}

TEST_CASE("gate validation") {
    auto g = default_gates();
    g.gates[2].lower = 1.05;
    CHECK_THROWS_AS(g.validate(), InvalidInput);
    g = default_gates();
    g.gates[0].upper = 0.99;
    CHECK_THROWS_AS(g.validate(), InvalidInput);
    g = default_gates();
    g.gates[0].lower = 0.0;
    CHECK_THROWS_AS(g.validate(), InvalidInput);
}

TEST_CASE("gates csv round trip") {
    const auto w = widen(default_gates(), 1.1);
    std::ostringstream out;
    write_gates_csv(out, w);
    std::istringstream in(out.str());
    const auto back = read_gates_csv(in);
    for (std::size_t a = 0; a < 6; ++a) {
        CHECK(back.gates[a].aggregate == w.gates[a].aggregate);
        CHECK(back.gates[a].lower == w.gates[a].lower);
        CHECK(back.gates[a].upper == w.gates[a].upper);
    }
    std::istringstream shuffled("aggregate,lower,upper\nPQ10,0.8,1.2\nAQ2,0.7,1.4\nAQ5,0.8,1.25\nAQ10,0.83,1.2\nPQ2,0.9,1.1\nPQ5,0.87,1.15\n");
    const auto s = read_gates_csv(shuffled);
    CHECK(s[Aggregate::aq2].upper == 1.4);
    CHECK(s[Aggregate::pq10].lower == 0.8);
    std::istringstream missing("aggregate,lower,upper\nAQ2,0.7,1.4\n");
    CHECK_THROWS_AS(read_gates_csv(missing), InvalidInput);
    std::istringstream bad("aggregate,lower,upper\nXQ2,0.7,1.4\n");
    CHECK_THROWS_AS(read_gates_csv(bad), InvalidInput);
}
