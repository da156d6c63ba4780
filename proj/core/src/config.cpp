#include "reserve_lasso/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reserve_lasso/csv.hpp"
#include "reserve_lasso/error.hpp"

namespace reserve_lasso {

using nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ordered_json spec_json(const SimulationSpec& s) {
    ordered_json j;
    j["name"] = s.name;
    j["side"] = s.side;
    j["base_level"] = s.base_level;
    j["row_slope"] = s.row_slope;
    j["hoerl_a"] = s.hoerl_a;
    j["hoerl_b"] = s.hoerl_b;
    j["period_scale"] = s.period_scale;
    j["si_base_rate"] = s.si_base_rate;
    j["si_knots"] = ordered_json::array();
    for (const auto& k : s.si_knots) j["si_knots"].push_back({{"knot", k.knot}, {"slope_change", k.slope_change}});
    j["si_dq_taper"] = s.si_dq_taper;
    if (s.step)
        j["step"] = {{"accident_threshold", s.step->accident_threshold},
                     {"development_threshold", s.step->development_threshold},
                     {"log_multiplier", s.step->log_multiplier}};
    else
        j["step"] = nullptr;
    j["dispersion"] = s.dispersion;
    return j;
}

SimulationSpec spec_of(const ordered_json& j) {
    SimulationSpec s;
    s.name = j.value("name", s.name);
    s.side = j.value("side", s.side);
    s.base_level = j.value("base_level", s.base_level);
    s.row_slope = j.value("row_slope", s.row_slope);
    s.hoerl_a = j.value("hoerl_a", s.hoerl_a);
    s.hoerl_b = j.value("hoerl_b", s.hoerl_b);
    s.period_scale = j.value("period_scale", s.period_scale);
    s.si_base_rate = j.value("si_base_rate", s.si_base_rate);
    if (j.contains("si_knots"))
        for (const auto& k : j.at("si_knots")) s.si_knots.push_back({k.at("knot").get<double>(), k.at("slope_change").get<double>()});
    s.si_dq_taper = j.value("si_dq_taper", s.si_dq_taper);
    if (j.contains("step") && !j.at("step").is_null()) {
        const auto& st = j.at("step");
        s.step = StepInteraction{st.at("accident_threshold").get<int>(), st.at("development_threshold").get<int>(),
                                 st.at("log_multiplier").get<double>()};
    }
    s.dispersion = j.value("dispersion", s.dispersion);
    s.validate();
    return s;
}

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string(what) + ": " + e.what());
    }
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidInput("config: " + msg); };
    if (side < 3) fail("side must be >= 3");
    if (path_length < 2 || path_length > 10000) fail("path_length must be in [2, 10000]");
    if (!(path_ratio > 0.0 && path_ratio < 1.0)) fail("path_ratio must be in (0, 1)");
    if (folds < 2) fail("folds must be >= 2");
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must be in (0, 1)");
    gates.validate();
    if (!(temporary_gate_factor >= 1.0)) fail("temporary_gate_factor must be >= 1");
    if (widen != 0.0 && !(widen > 1.0)) fail("widen must be 0 (off) or > 1");
    if (bootstrap < 0) fail("bootstrap must be >= 0");
    if (flavors.empty()) fail("at least one prior flavor is required");
    if (!(custom_lambda_g > 0.0)) fail("custom_lambda_g must be > 0");
    if (process_sims < 2) fail("process_sims must be >= 2");
    if (min_models < 1) fail("min_models must be >= 1");
    if (!(min_prob >= 0.0 && min_prob < 1.0)) fail("min_prob must be in [0, 1)");
    if (spec) spec->validate();
}

SimulationSpec RunConfig::simulation_spec() const {
    if (spec) return *spec;
    return preset(dataset, side);
}

std::string config_to_json(const RunConfig& c) {
    ordered_json j;
    j["dataset"] = c.dataset;
    j["spec"] = c.spec ? spec_json(*c.spec) : ordered_json(nullptr);
    j["triangle_file"] = c.triangle_file;
    j["side"] = c.side;
    j["seed"] = c.seed;
    j["path_length"] = c.path_length;
    j["path_ratio"] = c.path_ratio;
    j["folds"] = c.folds;
    j["epsilon"] = c.epsilon;
    j["gates"] = ordered_json::array();
    for (const auto& g : c.gates.gates)
        j["gates"].push_back({{"aggregate", aggregate_name(g.aggregate)}, {"lower", g.lower}, {"upper", g.upper}});
    j["temporary_gate_factor"] = c.temporary_gate_factor;
    j["widen"] = c.widen;
    j["bootstrap"] = c.bootstrap;
    j["flavors"] = ordered_json::array();
    for (auto f : c.flavors) j["flavors"].push_back(flavor_name(f));
    j["custom_lambda_g"] = c.custom_lambda_g;
    j["process_sims"] = c.process_sims;
    j["benchmark"] = c.benchmark;
    j["write_forecast"] = c.write_forecast;
    j["min_models"] = c.min_models;
    j["min_prob"] = c.min_prob;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
    return guarded("config", [&] {
        const auto j = ordered_json::parse(text);
        RunConfig c;
        c.dataset = j.value("dataset", c.dataset);
        if (j.contains("spec") && !j.at("spec").is_null()) c.spec = spec_of(j.at("spec"));
        c.triangle_file = j.value("triangle_file", c.triangle_file);
        c.side = j.value("side", c.side);
        c.seed = j.value("seed", c.seed);
        c.path_length = j.value("path_length", c.path_length);
        c.path_ratio = j.value("path_ratio", c.path_ratio);
        c.folds = j.value("folds", c.folds);
        c.epsilon = j.value("epsilon", c.epsilon);
        if (j.contains("gates")) {
            std::ostringstream csv;
            csv << "aggregate,lower,upper\n";
            for (const auto& g : j.at("gates"))
                csv << g.at("aggregate").get<std::string>() << ',' << format_number(g.at("lower").get<double>())
                    << ',' << format_number(g.at("upper").get<double>()) << '\n';
            std::istringstream in(csv.str());
            c.gates = read_gates_csv(in);
        }
        c.temporary_gate_factor = j.value("temporary_gate_factor", c.temporary_gate_factor);
        c.widen = j.value("widen", c.widen);
        c.bootstrap = j.value("bootstrap", c.bootstrap);
        if (j.contains("flavors")) {
            c.flavors.clear();
            for (const auto& f : j.at("flavors")) c.flavors.push_back(parse_flavor(f.get<std::string>()));
        }
        c.custom_lambda_g = j.value("custom_lambda_g", c.custom_lambda_g);
        c.process_sims = j.value("process_sims", c.process_sims);
        c.benchmark = j.value("benchmark", c.benchmark);
        c.write_forecast = j.value("write_forecast", c.write_forecast);
        c.min_models = j.value("min_models", c.min_models);
        c.min_prob = j.value("min_prob", c.min_prob);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.workers = j.value("workers", c.workers);
        c.validate();
        return c;
    });
}

RunConfig load_config(const std::string& path) { return config_from_json(slurp(path)); }

std::string spec_to_json(const SimulationSpec& spec) { return spec_json(spec).dump(2); }

SimulationSpec spec_from_json(const std::string& text) {
    return guarded("spec", [&] { return spec_of(ordered_json::parse(text)); });
}

SimulationSpec load_spec(const std::string& path) { return spec_from_json(slurp(path)); }

std::vector<PriorFlavor> parse_flavor_list(const std::string& csv) {
    std::vector<PriorFlavor> out;
    for (const auto& name : split_csv_line(csv))
        if (!name.empty()) out.push_back(parse_flavor(name));
    if (out.empty()) throw InvalidInput("empty flavor list");
    return out;
}

}  // namespace reserve_lasso
