#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reserve_lasso/forecast.hpp"
#include "reserve_lasso/gamma_glm.hpp"
#include "reserve_lasso/gates.hpp"
#include "reserve_lasso/synthetic.hpp"

namespace reserve_lasso {

// Covariates of the simulation's mean surface: intercept, i, ln j, j, then for
// SI the cumulative rate segments (times the development taper when set), and
// the step indicator. `include_step` = false omits the last column.
Eigen::MatrixXd true_structure_design(const SimulationSpec& spec, std::span<const CellIndex> cells,
                                      bool include_step = true,
                                      std::vector<std::string>* names = nullptr);

struct TrueGlm {
    SimulationSpec spec;
    std::vector<std::string> names;
    Eigen::MatrixXd past;
    Eigen::MatrixXd future;
    ForecastRegion region;
    std::vector<double> y;
    GlmFit fit;
    std::vector<double> future_means;
    ForecastTotals totals;
    double deviance = 0.0;  // Gamma deviance on the past cells
};

TrueGlm fit_true_glm(const SimulationSpec& spec, std::span<const double> y, bool include_step = true);

// Refit of the same structure to new data.
TrueGlm refit(const TrueGlm& model, std::span<const double> y);

double gamma_deviance(std::span<const double> y, std::span<const double> mu);

struct BenchmarkResult {
    double glm_reserve = 0.0;
    double glm_w_pa = 0.0;      // population CoV of surviving replication reserves
    double glm_mean = 0.0;
    int replications = 0;
    int surviving = 0;
    int failed = 0;             // refit failures
    double lasso_w_pa = 0.0;    // filled by the caller
    bool lasso_exceeds = false;
};

// Residual bootstrap of the GLM with the same pseudo-data rule as the LASSO
// bootstrap; each replication's forecast is gated against the GLM's own
// central forecast. Stream ("glm_bootstrap", b).
BenchmarkResult bootstrap_glm(const TrueGlm& model, double phi, const GateSet& gates, int replications,
                              std::uint64_t root_seed, unsigned workers = 1);

}  // namespace reserve_lasso
