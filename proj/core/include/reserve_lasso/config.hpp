#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reserve_lasso/bma.hpp"
#include "reserve_lasso/gates.hpp"
#include "reserve_lasso/synthetic.hpp"

namespace reserve_lasso {

struct RunConfig {
    std::string dataset = "dataset1";        // preset name; ignored when `spec` is set
    std::optional<SimulationSpec> spec;      // custom simulation spec
    std::string triangle_file;               // fit an observed triangle instead of simulating
    int side = 20;
    std::uint64_t seed = 1;
    int path_length = 100;
    double path_ratio = 1e-4;
    int folds = 8;
    double epsilon = 0.0005;
    GateSet gates = default_gates();
    double temporary_gate_factor = 1.4;
    double widen = 0.0;                      // > 1 enables the gate-sensitivity rerun
    int bootstrap = 50;
    std::vector<PriorFlavor> flavors{PriorFlavor::simple, PriorFlavor::onese, PriorFlavor::mincv,
                                     PriorFlavor::complex};
    double custom_lambda_g = 1.0;            // used by the custom flavor
    int process_sims = 10000;
    bool benchmark = false;
    bool write_forecast = true;
    int min_models = 5;
    double min_prob = 1e-4;
    std::string output_dir = "out";
    unsigned workers = 0;                    // 0 = available parallelism

    // Throws InvalidInput naming the first out-of-range field.
    void validate() const;
    // Simulation spec in effect (custom or preset scaled to `side`).
    SimulationSpec simulation_spec() const;
};

std::string config_to_json(const RunConfig& config);   // pretty-printed, stable key order
RunConfig config_from_json(const std::string& text);   // missing keys keep defaults
RunConfig load_config(const std::string& path);

std::string spec_to_json(const SimulationSpec& spec);
SimulationSpec spec_from_json(const std::string& text);
SimulationSpec load_spec(const std::string& path);

std::vector<PriorFlavor> parse_flavor_list(const std::string& csv);

}  // namespace reserve_lasso
