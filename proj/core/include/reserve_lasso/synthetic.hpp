#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reserve_lasso/triangle.hpp"

namespace reserve_lasso {

// Accident x development step: log mean raised by log_multiplier on cells with
// i >= accident_threshold and j >= development_threshold.
struct StepInteraction {
    int accident_threshold = 0;
    int development_threshold = 0;
    double log_multiplier = 0.0;
};

// Change of slope of the per-period superimposed-inflation rate at `knot`
// (payment period units).
struct RateKnot {
    double knot = 0.0;
    double slope_change = 0.0;
};

// Mean surface of a synthetic triangle, all on the log scale:
//
//   ln mu_ij = base + alpha_i + beta_j + taper_j * SI(t) + step_ij
//   alpha_i  = row_slope * (i - 1)
//   beta_j   = hoerl_a * ln(period_scale * j) - hoerl_b * period_scale * j
//   SI(t)    = sum_{s <= t} r_s,  r_s = si_base_rate + sum_k c_k * R_{K_k}(min(s, I))
//
// period_scale maps the side onto a 40-quarter time axis so the presets keep
// their shape at any triangle size. The SI rate is held at r_I beyond the last
// observed payment period.
struct SimulationSpec {
    std::string name = "custom";
    int side = 40;
    double base_level = 0.0;
    double row_slope = 0.0;
    double hoerl_a = 0.0;
    double hoerl_b = 0.0;
    double period_scale = 1.0;
    double si_base_rate = 0.0;
    std::vector<RateKnot> si_knots;
    bool si_dq_taper = false;
    std::optional<StepInteraction> step;
    double dispersion = 0.09;

    void validate() const;

    std::vector<double> row_effects() const;  // alpha_1..alpha_I
    std::vector<double> col_effects() const;  // beta_1..beta_I
    std::vector<double> si_profile() const;   // r_1..r_{2I-1}
    bool has_si() const { return si_base_rate != 0.0 || !si_knots.empty(); }

    // Cumulative SI at payment period t, before the development taper.
    double si_cumulative(int t) const;
    double si_taper(int j) const;
};

// Named presets dataset1..dataset4 scaled to `side`.
SimulationSpec preset(std::string_view name, int side = 40);
std::vector<std::string> preset_names();

double mean_surface(const SimulationSpec& spec, const CellIndex& cell);

// Past cells affected by the step interaction.
std::vector<CellIndex> step_region(const SimulationSpec& spec);

struct SimulatedTriangle {
    Triangle triangle;
    std::vector<double> past_means;    // aligned with past_cells(side)
    std::vector<double> future_means;  // aligned with future_cells(side)
    double true_reserve = 0.0;
    std::uint64_t seed = 0;
};

// Independent Gamma draws with mean mu_ij and variance dispersion * mu_ij^2.
SimulatedTriangle simulate(const SimulationSpec& spec, std::uint64_t seed);

}  // namespace reserve_lasso
