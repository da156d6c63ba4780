#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reserve_lasso/basis.hpp"
#include "reserve_lasso/bma.hpp"
#include "reserve_lasso/bootstrap.hpp"
#include "reserve_lasso/config.hpp"
#include "reserve_lasso/dispersion.hpp"
#include "reserve_lasso/forecast.hpp"
#include "reserve_lasso/gates.hpp"
#include "reserve_lasso/glm_benchmark.hpp"
#include "reserve_lasso/lasso_path.hpp"
#include "reserve_lasso/synthetic.hpp"
#include "reserve_lasso/triangle.hpp"

namespace reserve_lasso {

// Error raised by a pipeline stage; `stage()` names it for diagnostics.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct FlavorLambda {
    PriorFlavor flavor = PriorFlavor::onese;
    std::optional<double> lambda_g;  // absent when no value satisfies the definition
    int target_model = -1;           // mode-matching target, 0-based
    int mode_model = -1;             // target actually used after fallback
    std::string note;
};

struct FlavorResult {
    FlavorLambda lambda;
    std::optional<PosteriorDistribution> posterior;
    std::optional<PosteriorSummary> summary;
};

struct PrimaryResult {
    SimulationSpec spec;
    bool simulated = false;
    std::optional<double> true_reserve;
    Triangle triangle{1, {1.0}};
    DesignMatrix design;
    DesignMatrix future;
    ForecastRegion region;
    double lambda_max = 0.0;
    PenaltyPath path;
    PathFit fit;
    CvResult cv;
    DispersionEstimate dispersion;
    std::vector<ModelForecast> forecasts;   // one per converged path model
    std::vector<ModelEvidence> evidence;
    std::vector<GateResult> gate_results;   // against the primary (1se) model
    std::vector<int> survivors;
    std::array<int, kAggregateCount> censored{};
    std::vector<FlavorLambda> lambdas;
    std::vector<FlavorResult> flavors;

    int q_min() const { return static_cast<int>(cv.selection.q_min); }
    int q_1se() const { return static_cast<int>(cv.selection.q_1se); }
    const ModelForecast& primary_forecast() const { return forecasts.at(cv.selection.q_1se); }
    const FlavorResult* flavor(PriorFlavor f) const;
};

struct FlavorBootstrap {
    PriorFlavor flavor = PriorFlavor::onese;
    std::string note;
    std::optional<BootstrapMatrix> matrix;
    std::optional<ErrorDecomposition> decomposition;
};

struct BootstrapResult {
    std::vector<ReplicationResult> replications;
    double process_cov = 0.0;
    int floor_hits = 0;
    std::vector<FlavorBootstrap> flavors;
    // Gate-sensitivity rerun, present when widen > 1.
    std::optional<GateSet> widened_gates;
    std::vector<FlavorResult> widened_primary;
    std::vector<FlavorBootstrap> widened;

    const FlavorBootstrap* flavor(PriorFlavor f) const;
    const FlavorBootstrap* widened_flavor(PriorFlavor f) const;
};

struct Timing {
    std::string stage;
    double seconds = 0.0;
};

struct AnalysisResult {
    RunConfig config;
    PrimaryResult primary;
    std::optional<BootstrapResult> bootstrap;
    std::optional<BenchmarkResult> benchmark;
    std::vector<Timing> timings;
};

// Observed triangle in effect: read from config.triangle_file or simulated
// from the spec with the root seed.
struct InputData {
    SimulationSpec spec;
    bool simulated = false;
    bool spec_known = false;
    Triangle triangle{1, {1.0}};
    std::optional<double> true_reserve;
};
InputData load_input(const RunConfig& config);

// Penalty path, CV, dispersion, forecasts, gates and per-flavor posteriors.
PrimaryResult run_primary(const RunConfig& config, const InputData& input);

// Flavor lambdas on the full converged path; no gating involved.
std::vector<FlavorLambda> calibrate_flavors(const PrimaryResult& primary, const RunConfig& config);

// Posteriors over the primary models that pass `gates`.
std::vector<FlavorResult> flavor_posteriors(const PrimaryResult& primary, const GateSet& gates);

BootstrapSetup bootstrap_setup(const PrimaryResult& primary, const RunConfig& config);

BootstrapResult run_bootstrap_stage(const PrimaryResult& primary, const RunConfig& config);

// Assembly and decomposition of existing replications under `final_gates`,
// with primary posteriors `primary_flavors` as the rescaling targets.
std::vector<FlavorBootstrap> assemble_flavors(const PrimaryResult& primary, const RunConfig& config,
                                              std::span<const ReplicationResult> replications,
                                              double process_cov, const GateSet& final_gates,
                                              std::span<const FlavorResult> primary_flavors);

BenchmarkResult run_benchmark(const PrimaryResult& primary, const RunConfig& config,
                              const BootstrapResult* bootstrap);

AnalysisResult run_analysis(const RunConfig& config);

}  // namespace reserve_lasso
