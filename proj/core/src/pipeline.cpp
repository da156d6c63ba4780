#include "reserve_lasso/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "reserve_lasso/parallel.hpp"
#include "reserve_lasso/rng.hpp"

namespace reserve_lasso {
namespace {

template <class F>
auto stage(const char* name, std::vector<Timing>* timings, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
        if (timings)
            timings->push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
    };
    try {
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record();
        } else {
            auto out = f();
            record();
            return out;
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

const FlavorResult* PrimaryResult::flavor(PriorFlavor f) const {
    for (const auto& r : flavors)
        if (r.lambda.flavor == f) return &r;
    return nullptr;
}

const FlavorBootstrap* BootstrapResult::flavor(PriorFlavor f) const {
    for (const auto& r : flavors)
        if (r.flavor == f) return &r;
    return nullptr;
}

const FlavorBootstrap* BootstrapResult::widened_flavor(PriorFlavor f) const {
    for (const auto& r : widened)
        if (r.flavor == f) return &r;
    return nullptr;
}

InputData load_input(const RunConfig& config) {
    InputData input;
    if (!config.triangle_file.empty()) {
        std::ifstream in(config.triangle_file);
        if (!in) throw InvalidInput("cannot open triangle '" + config.triangle_file + "'");
        input.triangle = read_triangle_csv(in);
        if (config.spec) {
            input.spec = *config.spec;
            if (input.spec.side != input.triangle.side())
                throw InvalidInput("spec side does not match the triangle");
            input.spec_known = true;
            double total = 0.0;
            for (const auto& cell : future_cells(input.spec.side).cells) total += mean_surface(input.spec, cell);
            input.true_reserve = total;
        }
        return input;
    }
    input.spec = config.simulation_spec();
    const auto sim = simulate(input.spec, config.seed);
    input.simulated = true;
    input.spec_known = true;
    input.triangle = sim.triangle;
    input.true_reserve = sim.true_reserve;
    return input;
}

std::vector<FlavorLambda> calibrate_flavors(const PrimaryResult& primary, const RunConfig& config) {
    std::vector<FlavorLambda> out;
    for (auto flavor : config.flavors) {
        FlavorLambda fl;
        fl.flavor = flavor;
        switch (flavor) {
            case PriorFlavor::onese:
            case PriorFlavor::mincv: {
                fl.target_model = flavor == PriorFlavor::onese ? primary.q_1se() : primary.q_min();
                fl.mode_model = fl.target_model;
                try {
                    fl.lambda_g = calibrate_lambda_g(primary.evidence, fl.target_model);
                } catch (const UnattainableMode& e) {
                    if (e.nearest().empty()) {
                        fl.note = e.what();
                        break;
                    }
                    fl.mode_model = e.nearest().front();
                    fl.lambda_g = calibrate_lambda_g(primary.evidence, fl.mode_model);
                    fl.note = "mode " + std::to_string(fl.target_model + 1) + " unattainable; matched model " +
                              std::to_string(fl.mode_model + 1);
                }
                break;
            }
            case PriorFlavor::simple:
                fl.target_model = primary.q_1se();
                fl.lambda_g = find_extreme_lambda(primary.evidence, ExtremeSide::simple, fl.target_model, config.epsilon);
                if (!fl.lambda_g) fl.note = "no simple-model lambda in range";
                break;
            case PriorFlavor::complex:
                fl.target_model = primary.q_min();
                fl.lambda_g = find_extreme_lambda(primary.evidence, ExtremeSide::complex, fl.target_model, config.epsilon);
                if (!fl.lambda_g) fl.note = "no complex-model lambda in range";
                break;
            case PriorFlavor::custom:
                fl.lambda_g = config.custom_lambda_g;
                break;
        }
        out.push_back(std::move(fl));
    }
    return out;
}

std::vector<FlavorResult> flavor_posteriors(const PrimaryResult& primary, const GateSet& gates) {
    const auto& base = primary.primary_forecast().totals;
    std::vector<ModelEvidence> kept;
    std::vector<double> reserves;
    for (std::size_t q = 0; q < primary.forecasts.size(); ++q) {
        if (!gate_check(primary.forecasts[q].totals, base, gates).pass) continue;
        kept.push_back(primary.evidence[q]);
        reserves.push_back(primary.forecasts[q].totals.reserve);
    }
    std::vector<FlavorResult> out;
    for (const auto& fl : primary.lambdas) {
        FlavorResult r;
        r.lambda = fl;
        if (fl.lambda_g && !kept.empty()) {
            r.posterior = posterior(kept, {fl.flavor, *fl.lambda_g});
            r.summary = summarize(*r.posterior, reserves);
        }
        out.push_back(std::move(r));
    }
    return out;
}

PrimaryResult run_primary(const RunConfig& config, const InputData& input) {
    config.validate();
    PrimaryResult p;
    p.spec = input.spec;
    p.simulated = input.simulated;
    p.true_reserve = input.true_reserve;
    p.triangle = input.triangle;
    const int side = p.triangle.side();
    const auto y = p.triangle.values();
    const unsigned workers = config.workers;

    p.design = assemble(build_basis(side), p.triangle.cells());
    p.region = future_cells(side);
    p.future = assemble(p.design.stats, p.region.cells);
    const auto& x = p.design.values;
    const auto& pen = p.design.penalized();

    stage("path", nullptr, [&] {
        p.lambda_max = lambda_max(x, pen, y);
        p.path = make_path(p.lambda_max, config.path_length, config.path_ratio);
        p.fit = fit_path(x, pen, y, p.path);
        if (p.fit.points.empty()) throw NumericalError("no penalty on the path converged");
    });
    stage("cv", nullptr, [&] {
        p.cv = cross_validate(x, pen, y, p.path, p.fit.points.size(), config.folds,
                              stream_seed(config.seed, "cv"), {}, {}, workers);
    });
    stage("dispersion", nullptr, [&] {
        p.dispersion = estimate_dispersion(p.design, p.fit.points[p.cv.selection.q_1se].active, y);
    });
    stage("forecast", nullptr, [&] {
        p.forecasts.resize(p.fit.points.size());
        p.evidence.resize(p.fit.points.size());
        parallel_for(p.fit.points.size(), workers, [&](std::size_t q) {
            const auto& pt = p.fit.points[q];
            p.forecasts[q] = extrapolate(static_cast<int>(q), pt.beta, p.future, p.region);
            p.evidence[q] = {static_cast<int>(q), gamma_loglik(y, pt.fitted, p.dispersion.phi), l1_norm(pt.beta, pen)};
        });
    });
    stage("gates", nullptr, [&] {
        const auto& base = p.primary_forecast().totals;
        for (const auto& f : p.forecasts) {
            p.gate_results.push_back(gate_check(f.totals, base, config.gates));
            const auto& g = p.gate_results.back();
            for (std::size_t a = 0; a < kAggregateCount; ++a)
                if (!g.passed[a]) ++p.censored[a];
            if (g.pass) p.survivors.push_back(f.model_id);
        }
    });
    stage("bma", nullptr, [&] {
        p.lambdas = calibrate_flavors(p, config);
        p.flavors = flavor_posteriors(p, config.gates);
    });
    return p;
}

BootstrapSetup bootstrap_setup(const PrimaryResult& primary, const RunConfig& config) {
    BootstrapSetup setup;
    setup.design = &primary.design;
    setup.future = &primary.future;
    setup.region = &primary.region;
    setup.fitted = primary.fit.points.at(primary.cv.selection.q_1se).fitted;
    setup.phi = primary.dispersion.phi;
    setup.residuals = residuals(primary.triangle.values(), setup.fitted, setup.phi);
    setup.path_length = config.path_length;
    setup.path_ratio = config.path_ratio;
    return setup;
}

std::vector<FlavorBootstrap> assemble_flavors(const PrimaryResult& primary, const RunConfig& config,
                                              std::span<const ReplicationResult> replications,
                                              double process_cov, const GateSet& final_gates,
                                              std::span<const FlavorResult> primary_flavors) {
    const GateSet temporary = widen(final_gates, config.temporary_gate_factor);
    const auto& base = primary.primary_forecast().totals;
    std::vector<FlavorBootstrap> out;
    for (const auto& pf : primary_flavors) {
        FlavorBootstrap fb;
        fb.flavor = pf.lambda.flavor;
        if (!pf.summary) {
            fb.note = pf.lambda.note.empty() ? "no primary posterior" : pf.lambda.note;
            out.push_back(std::move(fb));
            continue;
        }
        try {
            fb.matrix = assemble(replications, base, pf.summary->mean, final_gates, temporary,
                                 {pf.lambda.flavor, *pf.lambda.lambda_g}, {config.min_models, config.min_prob});
            if (fb.matrix->rows.size() >= 2)
                fb.decomposition = decompose(fb.matrix->rows, process_cov);
            else
                fb.note = "fewer than two surviving replications";
        } catch (const InvalidInput& e) {
            fb.note = e.what();
        }
        out.push_back(std::move(fb));
    }
    return out;
}

BootstrapResult run_bootstrap_stage(const PrimaryResult& primary, const RunConfig& config) {
    BootstrapResult result;
    const BootstrapSetup setup = bootstrap_setup(primary, config);
    result.replications = run_bootstrap(setup, config.seed, config.bootstrap, config.workers);
    for (const auto& r : result.replications) result.floor_hits += r.floor_hits;
    result.process_cov = process_error(primary.primary_forecast().cell_forecasts, primary.dispersion.phi,
                                       config.process_sims, config.seed);
    result.flavors = assemble_flavors(primary, config, result.replications, result.process_cov, config.gates,
                                      primary.flavors);
    if (config.widen > 1.0) {
        result.widened_gates = widen(config.gates, config.widen);
        result.widened_primary = flavor_posteriors(primary, *result.widened_gates);
        result.widened = assemble_flavors(primary, config, result.replications, result.process_cov,
                                          *result.widened_gates, result.widened_primary);
    }
    return result;
}

BenchmarkResult run_benchmark(const PrimaryResult& primary, const RunConfig& config,
                              const BootstrapResult* bootstrap) {
    const TrueGlm model = fit_true_glm(primary.spec, primary.triangle.values());
    BenchmarkResult result = bootstrap_glm(model, primary.dispersion.phi, config.gates,
                                           std::max(config.bootstrap, 2), config.seed, config.workers);
    if (bootstrap) {
        if (const auto* fb = bootstrap->flavor(PriorFlavor::onese); fb && fb->decomposition) {
            result.lasso_w_pa = fb->decomposition->w_pa;
            result.lasso_exceeds = result.lasso_w_pa >= result.glm_w_pa;
        }
    }
    return result;
}

AnalysisResult run_analysis(const RunConfig& config) {
    config.validate();
    AnalysisResult a;
    a.config = config;
    const InputData input = stage("input", &a.timings, [&] { return load_input(config); });
    a.primary = stage("primary", &a.timings, [&] { return run_primary(config, input); });
    if (config.bootstrap > 0)
        a.bootstrap = stage("bootstrap", &a.timings, [&] { return run_bootstrap_stage(a.primary, config); });
    if (config.benchmark) {
        if (!input.spec_known) throw StageError("benchmark", "the benchmark needs a known simulation spec");
        a.benchmark = stage("benchmark", &a.timings, [&] {
            return run_benchmark(a.primary, config, a.bootstrap ? &*a.bootstrap : nullptr);
        });
    }
    return a;
}

}  // namespace reserve_lasso
