#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reserve_lasso/basis.hpp"
#include "reserve_lasso/bma.hpp"
#include "reserve_lasso/forecast.hpp"
#include "reserve_lasso/gates.hpp"
#include "reserve_lasso/lasso_path.hpp"
#include "reserve_lasso/rng.hpp"

namespace reserve_lasso {

struct ResidualSet {
    std::vector<double> values;  // centred standardized residuals
    double shift = 0.0;          // subtracted from the raw residuals
};

// rho = (y - mu) / (sqrt(phi) mu), shifted to zero mean.
ResidualSet residuals(std::span<const double> y, std::span<const double> mu, double phi);

struct PseudoData {
    std::vector<double> values;
    int floor_hits = 0;
};

inline constexpr double kPseudoDataFloor = 0.01;

// mu (1 + sqrt(phi) rho*) with rho* drawn from the residuals with replacement,
// floored at kPseudoDataFloor * mu.
PseudoData pseudo_data(std::span<const double> mu, double phi, const ResidualSet& res, Rng& rng);

// Everything a replication needs from the primary run.
struct BootstrapSetup {
    const DesignMatrix* design = nullptr;  // past cells
    const DesignMatrix* future = nullptr;  // future cells, past standardization
    const ForecastRegion* region = nullptr;
    std::vector<double> fitted;            // primary model fitted means
    double phi = 0.0;
    ResidualSet residuals;
    int path_length = 100;
    double path_ratio = 1e-4;
    SolverOptions solver;
};

struct ReplicationModel {
    int model_id = 0;
    ForecastTotals totals;
    double loglik = 0.0;
    double l1 = 0.0;
};

struct ReplicationResult {
    int b = 0;
    bool alive = false;
    std::string failure;
    int floor_hits = 0;
    bool path_truncated = false;
    std::vector<ReplicationModel> models;  // every converged path model
};

// Fits a fresh penalty path to `y` (own lambda_max, no CV) and forecasts every
// converged model. Solver failures mark the replication dead.
ReplicationResult run_replication(const BootstrapSetup& setup, std::span<const double> y, int b);

// Resamples with stream ("bootstrap", b) of `root_seed`, then runs the above.
ReplicationResult run_replication(const BootstrapSetup& setup, std::uint64_t root_seed, int b);

std::vector<ReplicationResult> run_bootstrap(const BootstrapSetup& setup, std::uint64_t root_seed,
                                             int replications, unsigned workers);

struct BootstrapRow {
    int b = 0;
    std::vector<int> model_ids;
    std::vector<double> reserves;  // rescaled
    std::vector<double> probs;
    double mean = 0.0;  // m^[b]
    double cov = 0.0;   // w_IMSE^[b]
    double s2 = 0.0;    // (m w)^2
};

struct AssemblyOptions {
    int min_models = 5;
    double min_prob = 1e-4;
};

struct BootstrapMatrix {
    PriorSpec prior;
    double scale_factor = 1.0;
    double provisional_mean = 0.0;  // mean of provisional posterior means
    int replications = 0;
    int dead = 0;                   // solver failure or no model through the temporary gates
    int sparse = 0;                 // dropped for too few non-negligible models
    std::array<int, kAggregateCount> temporary_censored{};
    std::array<int, kAggregateCount> final_censored{};
    std::vector<BootstrapRow> rows;  // surviving rows, ascending b
    int q_max() const;
};

// Temporary gates, provisional posterior means, one global rescaling to the
// primary posterior mean, final gates, posterior on the survivors, and the
// sparse-row rule.
BootstrapMatrix assemble(std::span<const ReplicationResult> replications, const ForecastTotals& primary,
                         double primary_posterior_mean, const GateSet& final_gates,
                         const GateSet& temporary_gates, const PriorSpec& prior,
                         const AssemblyOptions& options = {});

struct ErrorDecomposition {
    double m = 0.0;
    double s2_imse = 0.0;
    double w_imse = 0.0;
    double s2_pa = 0.0;
    double w_pa = 0.0;
    double w_pa_imse = 0.0;
    double w_pr = 0.0;
    double w_subtotal = 0.0;
    int n_surviving = 0;
};

// Quadrature combination of component CoVs.
ErrorDecomposition combine(double w_imse, double w_pa, double w_pr);

// Row averages over the bootstrap matrix combined with the process CoV.
// Requires at least two rows.
ErrorDecomposition decompose(std::span<const BootstrapRow> rows, double process_cov);

// CoV of the total of independent Gamma draws with means `future_means` and
// dispersion phi.
double process_error(std::span<const double> future_means, double phi, int simulations,
                     std::uint64_t root_seed);

}  // namespace reserve_lasso
