#include "reserve_lasso/report.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reserve_lasso/csv.hpp"
#include "reserve_lasso/error.hpp"

namespace reserve_lasso {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string software_version() { return RESERVE_LASSO_VERSION; }

namespace {

class Output {
public:
    Output(const fs::path& dir, std::vector<std::string>& names, const std::string& name)
        : out_(dir / name, std::ios::binary) {
        if (!out_) throw InvalidInput("cannot write '" + (dir / name).string() + "'");
        names.push_back(name);
    }
    std::ostream& stream() { return out_; }

private:
    std::ofstream out_;
};

// Optional values print as empty fields.
template <class T>
CsvWriter& opt(CsvWriter& csv, const std::optional<T>& v) {
    return v ? csv.cell(*v) : csv.cell(std::string_view{});
}

std::string plain(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

std::string flavor_file(const char* stem, PriorFlavor f) {
    return std::string(stem) + "_" + std::string(flavor_name(f)) + ".csv";
}

void write_path(std::ostream& os, const PrimaryResult& p) {
    CsvWriter csv(os, {"q", "lambda", "n_active", "deviance", "cv_mean", "cv_se", "reserve", "loglik", "l1",
                       "gate_pass", "outer_iterations"});
    for (std::size_t q = 0; q < p.fit.points.size(); ++q) {
        const auto& pt = p.fit.points[q];
        csv.cell(q + 1).cell(pt.lambda).cell(pt.active.size()).cell(pt.deviance).cell(p.cv.mean[q]).cell(p.cv.se[q]);
        csv.cell(p.forecasts[q].totals.reserve).cell(p.evidence[q].loglik).cell(p.evidence[q].l1);
        csv.cell(p.gate_results[q].pass ? 1 : 0).cell(pt.outer_iterations);
        csv.end_row();
    }
}

std::size_t heavy_models(const PosteriorDistribution& post, double min_prob) {
    return static_cast<std::size_t>(
        std::count_if(post.probs.begin(), post.probs.end(), [&](double pr) { return pr > min_prob; }));
}

void write_primary_reserves(std::ostream& os, const AnalysisResult& a) {
    const auto& p = a.primary;
    CsvWriter csv(os, {"flavor", "lambda_g", "mode_model", "true_reserve", "primary_reserve", "posterior_mean",
                       "imse_cov", "n_models", "n_weighty", "note"});
    for (const auto& f : p.flavors) {
        csv.cell(flavor_name(f.lambda.flavor));
        opt(csv, f.lambda.lambda_g);
        if (f.lambda.mode_model >= 0)
            csv.cell(f.lambda.mode_model + 1);
        else
            csv.cell(std::string_view{});
        opt(csv, p.true_reserve);
        csv.cell(p.primary_forecast().totals.reserve);
        if (f.summary) {
            csv.cell(f.summary->mean).cell(f.summary->cov).cell(f.posterior->probs.size());
            csv.cell(heavy_models(*f.posterior, a.config.min_prob));
        } else {
            for (int k = 0; k < 4; ++k) csv.cell(std::string_view{});
        }
        csv.cell(plain(f.lambda.note));
        csv.end_row();
    }
}

void write_posterior(std::ostream& os, const FlavorResult& f) {
    CsvWriter csv(os, {"q", "reserve", "prob"});
    for (std::size_t k = 0; k < f.posterior->probs.size(); ++k) {
        csv.cell(f.posterior->model_ids[k] + 1).cell(f.summary->reserves[k]).cell(f.posterior->probs[k]);
        csv.end_row();
    }
}

void write_matrix(std::ostream& os, const BootstrapMatrix& m) {
    CsvWriter csv(os, {"b", "q", "reserve", "prob"});
    for (const auto& row : m.rows)
        for (std::size_t k = 0; k < row.model_ids.size(); ++k) {
            csv.cell(row.b).cell(row.model_ids[k] + 1).cell(row.reserves[k]).cell(row.probs[k]);
            csv.end_row();
        }
}

void write_bootstrap_summary(std::ostream& os, const AnalysisResult& a) {
    const auto& bs = *a.bootstrap;
    CsvWriter csv(os, {"flavor", "replications", "surviving", "dead", "sparse", "q_max", "scale_factor",
                       "reserve_mean", "imse_cov", "note"});
    for (const auto& fb : bs.flavors) {
        csv.cell(flavor_name(fb.flavor)).cell(static_cast<int>(bs.replications.size()));
        if (fb.matrix) {
            const auto& m = *fb.matrix;
            csv.cell(m.rows.size()).cell(m.dead).cell(m.sparse).cell(m.q_max()).cell(m.scale_factor);
        } else {
            for (int k = 0; k < 5; ++k) csv.cell(std::string_view{});
        }
        if (fb.decomposition)
            csv.cell(fb.decomposition->m).cell(fb.decomposition->w_imse);
        else
            csv.cell(std::string_view{}).cell(std::string_view{});
        csv.cell(plain(fb.note));
        csv.end_row();
    }
}

void decomposition_rows(CsvWriter& csv, std::string_view gates, const std::vector<FlavorBootstrap>& flavors) {
    for (const auto& fb : flavors) {
        if (!fb.decomposition) continue;
        const auto& d = *fb.decomposition;
        csv.cell(gates).cell(flavor_name(fb.flavor)).cell(d.m).cell(d.w_imse).cell(d.w_pa).cell(d.w_pa_imse);
        csv.cell(d.w_pr).cell(d.w_subtotal).cell(d.n_surviving);
        csv.end_row();
    }
}

void write_decomposition(std::ostream& os, const BootstrapResult& bs) {
    CsvWriter csv(os, {"gates", "flavor", "reserve_mean", "imse_cov", "parameter_cov", "parameter_imse_cov",
                       "process_cov", "subtotal_cov", "n_surviving"});
    decomposition_rows(csv, "original", bs.flavors);
    if (bs.widened_gates) decomposition_rows(csv, "widened", bs.widened);
}

void write_sensitivity(std::ostream& os, const AnalysisResult& a) {
    const auto& bs = *a.bootstrap;
    CsvWriter csv(os, {"flavor", "widen_factor", "subtotal_original", "subtotal_widened", "ratio"});
    for (const auto& fb : bs.flavors) {
        const auto* wide = bs.widened_flavor(fb.flavor);
        if (!fb.decomposition || !wide || !wide->decomposition) continue;
        const double o = fb.decomposition->w_subtotal;
        const double w = wide->decomposition->w_subtotal;
        csv.cell(flavor_name(fb.flavor)).cell(a.config.widen).cell(o).cell(w).cell(w / o);
        csv.end_row();
    }
}

void write_benchmark(std::ostream& os, const BenchmarkResult& b) {
    CsvWriter csv(os, {"glm_reserve", "glm_mean", "glm_parameter_cov", "lasso_parameter_cov", "lasso_exceeds",
                       "replications", "surviving", "failed"});
    csv.cell(b.glm_reserve).cell(b.glm_mean).cell(b.glm_w_pa).cell(b.lasso_w_pa).cell(b.lasso_exceeds ? 1 : 0);
    csv.cell(b.replications).cell(b.surviving).cell(b.failed);
    csv.end_row();
}

void write_replications(std::ostream& os, const BootstrapResult& bs) {
    CsvWriter csv(os, {"b", "alive", "path_length", "truncated", "floor_hits", "failure"});
    for (const auto& r : bs.replications) {
        csv.cell(r.b).cell(r.alive ? 1 : 0).cell(r.models.size()).cell(r.path_truncated ? 1 : 0).cell(r.floor_hits);
        csv.cell(plain(r.failure));
        csv.end_row();
    }
}

void censor_rows(CsvWriter& csv, std::string_view pass, std::string_view flavor,
                 const std::array<int, kAggregateCount>& counts) {
    for (std::size_t k = 0; k < kAggregateCount; ++k) {
        csv.cell(pass).cell(flavor).cell(aggregate_name(kAllAggregates[k])).cell(counts[k]);
        csv.end_row();
    }
}

void write_censorship(std::ostream& os, const AnalysisResult& a) {
    CsvWriter csv(os, {"pass", "flavor", "aggregate", "censored"});
    censor_rows(csv, "primary", "", a.primary.censored);
    if (!a.bootstrap) return;
    for (const auto& fb : a.bootstrap->flavors) {
        if (!fb.matrix) continue;
        censor_rows(csv, "temporary", flavor_name(fb.flavor), fb.matrix->temporary_censored);
        censor_rows(csv, "final", flavor_name(fb.flavor), fb.matrix->final_censored);
    }
}

ordered_json counts_json(const std::array<int, kAggregateCount>& counts) {
    ordered_json j;
    for (std::size_t k = 0; k < kAggregateCount; ++k) j[std::string(aggregate_name(kAllAggregates[k]))] = counts[k];
    return j;
}

template <class T>
ordered_json opt_json(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string manifest_json(const AnalysisResult& a) {
    const auto& p = a.primary;
    ordered_json j;
    j["software"] = {{"name", "reserve_lasso"}, {"version", software_version()}};
    j["config"] = ordered_json::parse(config_to_json(a.config));
    j["data"] = {{"side", p.triangle.side()},
                 {"cells", p.triangle.cell_count()},
                 {"simulated", p.simulated},
                 {"true_reserve", opt_json(p.true_reserve)}};
    j["basis"] = {{"columns", p.design.cols()}, {"dropped", p.design.dropped.size()}};
    j["path"] = {{"lambda_max", p.lambda_max},
                 {"requested", p.fit.requested},
                 {"converged", p.fit.points.size()},
                 {"q_min", p.q_min() + 1},
                 {"q_1se", p.q_1se() + 1}};
    j["dispersion"] = {{"phi", p.dispersion.phi},
                       {"structure_columns", p.dispersion.source_structure.size()}};
    j["primary_reserve"] = p.primary_forecast().totals.reserve;
    j["primary_censored"] = counts_json(p.censored);
    j["primary_survivors"] = p.survivors.size();
    j["flavors"] = ordered_json::array();
    for (const auto& f : p.flavors)
        j["flavors"].push_back({{"flavor", flavor_name(f.lambda.flavor)},
                                {"lambda_g", opt_json(f.lambda.lambda_g)},
                                {"target_model", f.lambda.target_model >= 0 ? ordered_json(f.lambda.target_model + 1) : ordered_json(nullptr)},
                                {"mode_model", f.lambda.mode_model >= 0 ? ordered_json(f.lambda.mode_model + 1) : ordered_json(nullptr)},
                                {"note", f.lambda.note}});
    if (a.bootstrap) {
        const auto& bs = *a.bootstrap;
        ordered_json b;
        b["replications"] = bs.replications.size();
        b["dead_paths"] = std::count_if(bs.replications.begin(), bs.replications.end(),
                                        [](const ReplicationResult& r) { return !r.alive; });
        b["floor_hits"] = bs.floor_hits;
        b["process_cov"] = bs.process_cov;
        b["flavors"] = ordered_json::array();
        for (const auto& fb : bs.flavors) {
            ordered_json f{{"flavor", flavor_name(fb.flavor)}, {"note", fb.note}};
            if (fb.matrix) {
                f["surviving"] = fb.matrix->rows.size();
                f["scale_factor"] = fb.matrix->scale_factor;
                f["temporary_censored"] = counts_json(fb.matrix->temporary_censored);
                f["final_censored"] = counts_json(fb.matrix->final_censored);
            }
            b["flavors"].push_back(std::move(f));
        }
        if (bs.widened_gates) {
            b["widened_gates"] = ordered_json::array();
            for (const auto& g : bs.widened_gates->gates)
                b["widened_gates"].push_back({{"aggregate", aggregate_name(g.aggregate)}, {"lower", g.lower}, {"upper", g.upper}});
        }
        j["bootstrap"] = std::move(b);
    } else {
        j["bootstrap"] = nullptr;
    }
    j["benchmark"] = a.benchmark ? ordered_json{{"glm_parameter_cov", a.benchmark->glm_w_pa},
                                                {"surviving", a.benchmark->surviving}}
                                 : ordered_json(nullptr);
    ordered_json t = ordered_json::object();
    for (const auto& timing : a.timings) t[timing.stage] = timing.seconds;
    j["timings"] = std::move(t);
    return j.dump(2) + "\n";
}

std::vector<std::string> write_outputs(const AnalysisResult& a, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<std::string> names;
    const auto& p = a.primary;
    { Output o(dir, names, "triangle.csv"); write_triangle_csv(o.stream(), p.triangle); }
    { Output o(dir, names, "basis_columns.csv"); write_basis_csv(o.stream(), p.design); }
    { Output o(dir, names, "path.csv"); write_path(o.stream(), p); }
    { Output o(dir, names, "primary_reserves.csv"); write_primary_reserves(o.stream(), a); }
    for (const auto& f : p.flavors) {
        if (!f.posterior) continue;
        Output o(dir, names, flavor_file("posterior", f.lambda.flavor));
        write_posterior(o.stream(), f);
    }
    if (a.config.write_forecast) {
        Output o(dir, names, "primary_forecast.csv");
        write_forecast_csv(o.stream(), p.region, p.primary_forecast().cell_forecasts);
    }
    if (a.bootstrap) {
        const auto& bs = *a.bootstrap;
        { Output o(dir, names, "replications.csv"); write_replications(o.stream(), bs); }
        for (const auto& fb : bs.flavors) {
            if (!fb.matrix) continue;
            Output o(dir, names, flavor_file("bootstrap_matrix", fb.flavor));
            write_matrix(o.stream(), *fb.matrix);
        }
        { Output o(dir, names, "bootstrap_summary.csv"); write_bootstrap_summary(o.stream(), a); }
        { Output o(dir, names, "decomposition.csv"); write_decomposition(o.stream(), bs); }
        if (bs.widened_gates) {
            Output o(dir, names, "gate_sensitivity.csv");
            write_sensitivity(o.stream(), a);
        }
    }
    { Output o(dir, names, "censorship.csv"); write_censorship(o.stream(), a); }
    if (a.benchmark) {
        Output o(dir, names, "benchmark.csv");
        write_benchmark(o.stream(), *a.benchmark);
    }
    {
        Output o(dir, names, "manifest.json");
        o.stream() << manifest_json(a);
    }
    return names;
}

std::vector<std::string> write_simulation(const SimulationSpec& spec, const SimulatedTriangle& sim,
                                          const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<std::string> names;
    { Output o(dir, names, "triangle.csv"); write_triangle_csv(o.stream(), sim.triangle); }
    { Output o(dir, names, "spec.json"); o.stream() << spec_to_json(spec) << "\n"; }
    {
        Output o(dir, names, "true_means.csv");
        CsvWriter csv(o.stream(), {"i", "j", "region", "mean"});
        const auto past = past_cells(spec.side);
        for (std::size_t k = 0; k < past.size(); ++k) {
            csv.cell(past[k].i).cell(past[k].j).cell("past").cell(sim.past_means[k]);
            csv.end_row();
        }
        const auto future = future_cells(spec.side);
        for (std::size_t k = 0; k < future.size(); ++k) {
            csv.cell(future.cells[k].i).cell(future.cells[k].j).cell("future").cell(sim.future_means[k]);
            csv.end_row();
        }
    }
    return names;
}

namespace {

void print_table(std::ostream& out, const fs::path& file) {
    std::ifstream in(file);
    if (!in) return;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(split_csv_line(line));
    if (rows.empty()) return;
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], r[c].size());
        }
    out << "== " << file.filename().string() << "\n";
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << r[c];
            if (c + 1 < r.size()) out << std::string(width[c] - r[c].size() + 2, ' ');
        }
        out << "\n";
    }
    out << "\n";
}

}  // namespace

void print_report(std::ostream& out, const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) throw InvalidInput("no manifest.json in '" + dir.string() + "'");
    for (const char* name : {"primary_reserves.csv", "bootstrap_summary.csv", "decomposition.csv",
                             "gate_sensitivity.csv", "benchmark.csv", "censorship.csv"})
        print_table(out, dir / name);
}

}  // namespace reserve_lasso
