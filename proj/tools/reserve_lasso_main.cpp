// reserve_lasso: simulate, fit, bootstrap and report loss-reserve error
// estimates from an L1-penalized path with Bayesian model averaging.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "reserve_lasso/config.hpp"
#include "reserve_lasso/error.hpp"
#include "reserve_lasso/pipeline.hpp"
#include "reserve_lasso/report.hpp"

namespace rl = reserve_lasso;

namespace {

struct RunFlags {
    std::optional<std::string> config_file;
    std::optional<std::string> dataset;
    std::optional<std::string> spec_file;
    std::optional<std::string> triangle_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> size;
    std::optional<int> bootstrap;
    std::optional<std::string> flavors;
    std::optional<std::string> gates_file;
    std::optional<double> widen;
    bool benchmark = false;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
    std::optional<int> path_length;
    std::optional<double> path_ratio;
    std::optional<int> folds;
    std::optional<int> process_sims;
    std::optional<double> epsilon;
    std::optional<double> lambda_g;
    bool no_forecast = false;
};

void add_data_flags(CLI::App& app, RunFlags& f) {
    app.add_option("--dataset", f.dataset, "Preset: dataset1..dataset4");
    app.add_option("--spec", f.spec_file, "Simulation spec JSON")->check(CLI::ExistingFile);
    app.add_option("--seed", f.seed, "Root seed");
    app.add_option("--size", f.size, "Triangle side I")->check(CLI::Range(3, 200));
    app.add_option("--out", f.out, "Output directory");
}

void add_run_flags(CLI::App& app, RunFlags& f) {
    app.add_option("--config", f.config_file, "Run config JSON; flags override it")->check(CLI::ExistingFile);
    app.add_option("--bootstrap", f.bootstrap, "Bootstrap replications B (0 = primary only)")->check(CLI::NonNegativeNumber);
    app.add_option("--flavors", f.flavors, "Comma list of simple,1se,mincv,complex,custom");
    app.add_option("--gates", f.gates_file, "Gates CSV (aggregate,lower,upper)")->check(CLI::ExistingFile);
    app.add_option("--widen", f.widen, "Gate-sensitivity widening factor");
    app.add_flag("--benchmark", f.benchmark, "Bootstrap the true-structure GLM");
    app.add_option("--workers", f.workers, "Worker threads (0 = all cores)");
    app.add_option("--path-length", f.path_length, "Penalties on the path Q");
    app.add_option("--path-ratio", f.path_ratio, "Smallest penalty as a fraction of lambda_max");
    app.add_option("--folds", f.folds, "Cross-validation folds");
    app.add_option("--process-sims", f.process_sims, "Process-error simulations");
    app.add_option("--epsilon", f.epsilon, "Tail mass for the simple/complex priors");
    app.add_option("--lambda-g", f.lambda_g, "Prior dispersion for the custom flavor");
    app.add_flag("--no-forecast", f.no_forecast, "Skip primary_forecast.csv");
}

rl::RunConfig build_config(const RunFlags& f) {
    rl::RunConfig c = f.config_file ? rl::load_config(*f.config_file) : rl::RunConfig{};
    if (f.dataset) {
        c.dataset = *f.dataset;
        c.spec.reset();
    }
    if (f.size) c.side = *f.size;
    if (f.spec_file) c.spec = rl::load_spec(*f.spec_file);
    if (c.spec && f.size && c.spec->side != *f.size) throw rl::InvalidInput("--size conflicts with the spec side");
    if (c.spec) c.side = c.spec->side;
    if (f.triangle_file) c.triangle_file = *f.triangle_file;
    if (f.seed) c.seed = *f.seed;
    if (f.bootstrap) c.bootstrap = *f.bootstrap;
    if (f.flavors) c.flavors = rl::parse_flavor_list(*f.flavors);
    if (f.gates_file) {
        std::ifstream in(*f.gates_file);
        c.gates = rl::read_gates_csv(in);
    }
    if (f.widen) c.widen = *f.widen;
    if (f.benchmark) c.benchmark = true;
    if (f.out) c.output_dir = *f.out;
    if (f.path_length) c.path_length = *f.path_length;
    if (f.path_ratio) c.path_ratio = *f.path_ratio;
    if (f.folds) c.folds = *f.folds;
    if (f.process_sims) c.process_sims = *f.process_sims;
    if (f.epsilon) c.epsilon = *f.epsilon;
    if (f.lambda_g) c.custom_lambda_g = *f.lambda_g;
    if (f.no_forecast) c.write_forecast = false;
    if (f.workers) {
        c.workers = *f.workers;
    } else if (const char* env = std::getenv("RESERVE_LASSO_WORKERS"); env && *env) {
        try {
            c.workers = static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
            throw rl::InvalidInput("RESERVE_LASSO_WORKERS must be a nonnegative integer");
        }
    }
    c.validate();
    return c;
}

void print_brief(const rl::AnalysisResult& a) {
    const auto& p = a.primary;
    std::cout << "converged path: " << p.fit.points.size() << "/" << p.fit.requested
              << "  q_min=" << p.q_min() + 1 << "  q_1se=" << p.q_1se() + 1 << "  phi=" << p.dispersion.phi << "\n";
    if (p.true_reserve) std::cout << "true reserve: " << *p.true_reserve << "\n";
    std::cout << "primary reserve: " << p.primary_forecast().totals.reserve << "\n";
    for (const auto& f : p.flavors) {
        std::cout << "  " << rl::flavor_name(f.lambda.flavor) << ": ";
        if (f.summary)
            std::cout << "mean " << f.summary->mean << "  IMSE CoV " << f.summary->cov;
        else
            std::cout << "unavailable (" << f.lambda.note << ")";
        std::cout << "\n";
    }
    if (a.bootstrap)
        for (const auto& fb : a.bootstrap->flavors)
            if (fb.decomposition)
                std::cout << "  bootstrap " << rl::flavor_name(fb.flavor) << ": surviving " << fb.decomposition->n_surviving
                          << "  sub-total CoV " << fb.decomposition->w_subtotal << "\n";
}

int run_pipeline(const rl::RunConfig& config) {
    const auto analysis = rl::run_analysis(config);
    const auto files = rl::write_outputs(analysis, config.output_dir);
    print_brief(analysis);
    std::cout << "wrote " << files.size() << " files to " << config.output_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loss-reserve error estimation with a LASSO path, model averaging and bootstrap"};
    app.set_version_flag("--version", rl::software_version());
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Simulate (or read) a triangle and run every stage");
    add_data_flags(*run, run_flags);
    add_run_flags(*run, run_flags);
    run->add_option("--triangle", run_flags.triangle_file, "Observed triangle CSV instead of simulating")
        ->check(CLI::ExistingFile);

    RunFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic triangle, its spec and true means");
    add_data_flags(*simulate, sim_flags);

    RunFlags fit_flags;
    auto* fit = app.add_subcommand("fit", "Run the pipeline on a triangle CSV");
    add_data_flags(*fit, fit_flags);
    add_run_flags(*fit, fit_flags);
    fit->add_option("--triangle", fit_flags.triangle_file, "Triangle CSV (i,j,value)")
        ->required()
        ->check(CLI::ExistingFile);

    std::string report_dir = "out";
    auto* report = app.add_subcommand("report", "Print the summary tables of an output directory");
    report->add_option("--out", report_dir, "Output directory of a previous run");

    CLI11_PARSE(app, argc, argv);

    const char* stage = "config";
    try {
        if (*run) {
            const auto config = build_config(run_flags);
            stage = "run";
            return run_pipeline(config);
        }
        if (*simulate) {
            rl::RunConfig c = build_config(sim_flags);
            stage = "simulate";
            const auto spec = c.simulation_spec();
            const auto sim = rl::simulate(spec, c.seed);
            const auto files = rl::write_simulation(spec, sim, c.output_dir);
            std::cout << "true reserve: " << sim.true_reserve << "\nwrote " << files.size() << " files to "
                      << c.output_dir << "\n";
            return 0;
        }
        if (*fit) {
            if (!fit_flags.spec_file && fit_flags.dataset)
                throw rl::InvalidInput("fit: use --spec, not --dataset, to attach a known simulation");
            const auto config = build_config(fit_flags);
            stage = "fit";
            return run_pipeline(config);
        }
        if (*report) {
            stage = "report";
            rl::print_report(std::cout, report_dir);
            return 0;
        }
    } catch (const rl::StageError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error [" << stage << "]: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
