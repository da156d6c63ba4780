#include "reserve_lasso/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "reserve_lasso/error.hpp"
#include "reserve_lasso/rng.hpp"

namespace reserve_lasso {
namespace {

// Quarter-axis constants for the presets (40 quarters of history).
constexpr double kQuarters = 40.0;
constexpr double kBaseLevel = -1.5;
constexpr double kRowSlopePerQuarter = 0.006;
constexpr double kHoerlA = 2.0;
constexpr double kHoerlBPerQuarter = 0.25;  // peak at quarter a/b = 8
constexpr double kSiBaseRate = 0.005;
constexpr double kSiRise = 0.010;
constexpr double kStepLogMultiplier = 0.26236426446749106;  // ln 1.3
constexpr double kDispersion = 0.09;                          // cell CoV 30%

}  // namespace

void SimulationSpec::validate() const {
    if (side < 2) throw InvalidInput("simulation spec: side must be >= 2");
    if (!(dispersion > 0.0)) throw InvalidInput("simulation spec: dispersion must be > 0");
    if (!(period_scale > 0.0)) throw InvalidInput("simulation spec: period_scale must be > 0");
    if (step && (step->accident_threshold < 1 || step->development_threshold < 1))
        throw InvalidInput("simulation spec: step thresholds must be >= 1");
}

std::vector<double> SimulationSpec::row_effects() const {
    std::vector<double> alpha(side);
    for (int i = 1; i <= side; ++i) alpha[i - 1] = row_slope * (i - 1);
    return alpha;
}

std::vector<double> SimulationSpec::col_effects() const {
    std::vector<double> beta(side);
    for (int j = 1; j <= side; ++j) {
        const double x = period_scale * j;
        beta[j - 1] = hoerl_a * std::log(x) - hoerl_b * x;
    }
    return beta;
}

std::vector<double> SimulationSpec::si_profile() const {
    std::vector<double> rates(2 * side - 1);
    for (int t = 1; t <= 2 * side - 1; ++t) {
        const double s = std::min(t, side);
        double r = si_base_rate;
        for (const auto& k : si_knots) r += k.slope_change * std::max(0.0, s - k.knot);
        rates[t - 1] = r;
    }
    return rates;
}

double SimulationSpec::si_cumulative(int t) const {
    if (!has_si()) return 0.0;
    double total = 0.0;
    for (int s = 1; s <= t; ++s) {
        const double capped = std::min(s, side);
        double r = si_base_rate;
        for (const auto& k : si_knots) r += k.slope_change * std::max(0.0, capped - k.knot);
        total += r;
    }
    return total;
}

double SimulationSpec::si_taper(int j) const {
    if (!si_dq_taper) return 1.0;
    return std::max(0.0, static_cast<double>(side - j) / (side - 1));
}

SimulationSpec preset(std::string_view name, int side) {
    if (side < 2) throw InvalidInput("preset: side must be >= 2");
    const double scale = kQuarters / side;  // quarters per period

    SimulationSpec spec;
    spec.name = std::string(name);
    spec.side = side;
    spec.base_level = kBaseLevel;
    spec.row_slope = kRowSlopePerQuarter * scale;
    spec.hoerl_a = kHoerlA;
    spec.hoerl_b = kHoerlBPerQuarter;
    spec.period_scale = scale;
    spec.dispersion = kDispersion;

    const bool si = name == "dataset2" || name == "dataset3" || name == "dataset4";
    if (name != "dataset1" && !si) throw InvalidInput("unknown preset '" + std::string(name) + "'");
    if (si) {
        // Quarterly rate: flat to q12, rising q13-24, flat q25-32, rising q33-40.
        // A per-quarter rate r becomes scale*r per period; slopes scale by scale^2.
        spec.si_base_rate = kSiBaseRate * scale;
        const double s2 = scale * scale;
        spec.si_knots = {{12.0 / scale, kSiRise / 12.0 * s2},
                         {24.0 / scale, -kSiRise / 12.0 * s2},
                         {32.0 / scale, kSiRise / 8.0 * s2}};
    }
    if (name == "dataset3") {
        spec.step = StepInteraction{1 + static_cast<int>(std::lround(16.0 / scale)),
                                    1 + static_cast<int>(std::lround(20.0 / scale)),
                                    kStepLogMultiplier};
    }
    if (name == "dataset4") spec.si_dq_taper = true;
    return spec;
}

std::vector<std::string> preset_names() { return {"dataset1", "dataset2", "dataset3", "dataset4"}; }

double mean_surface(const SimulationSpec& spec, const CellIndex& cell) {
    if (cell.i < 1 || cell.j < 1 || cell.i > spec.side || cell.j > spec.side)
        throw InvalidInput("mean_surface: cell outside the I x I square");
    const double x = spec.period_scale * cell.j;
    double log_mean = spec.base_level + spec.row_slope * (cell.i - 1) + spec.hoerl_a * std::log(x) -
                      spec.hoerl_b * x;
    if (spec.has_si()) log_mean += spec.si_taper(cell.j) * spec.si_cumulative(cell.t());
    if (spec.step && cell.i >= spec.step->accident_threshold &&
        cell.j >= spec.step->development_threshold)
        log_mean += spec.step->log_multiplier;
    return std::exp(log_mean);
}

std::vector<CellIndex> step_region(const SimulationSpec& spec) {
    if (!spec.step) throw InvalidInput("step_region: spec has no step interaction");
    std::vector<CellIndex> region;
    for (const auto& cell : past_cells(spec.side))
        if (cell.i >= spec.step->accident_threshold && cell.j >= spec.step->development_threshold)
            region.push_back(cell);
    return region;
}

SimulatedTriangle simulate(const SimulationSpec& spec, std::uint64_t seed) {
    spec.validate();
    auto rng = make_rng(seed, "simulate");
    const double shape = 1.0 / spec.dispersion;

    const auto past = past_cells(spec.side);
    std::vector<double> means(past.size());
    std::vector<double> values(past.size());
    for (std::size_t k = 0; k < past.size(); ++k) {
        means[k] = mean_surface(spec, past[k]);
        std::gamma_distribution<double> draw(shape, means[k] * spec.dispersion);
        values[k] = draw(rng);
        // Guard against an underflowed draw at extreme dispersions.
        if (!(values[k] > 0.0)) values[k] = std::numeric_limits<double>::min();
    }

    const auto region = future_cells(spec.side);
    std::vector<double> future(region.size());
    for (std::size_t k = 0; k < region.size(); ++k) future[k] = mean_surface(spec, region.cells[k]);

    SimulatedTriangle out{Triangle(spec.side, std::move(values)), std::move(means), future,
                          reserve(future), seed};
    return out;
}

}  // namespace reserve_lasso
