#include "reserve_lasso/glm_benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "reserve_lasso/bootstrap.hpp"
#include "reserve_lasso/error.hpp"
#include "reserve_lasso/parallel.hpp"

namespace reserve_lasso {
namespace {

// sum_{s <= t} max(0, min(s, I) - knot)
double cumulative_ramp(int t, int side, double knot) {
    double total = 0.0;
    for (int s = 1; s <= t; ++s) total += std::max(0.0, std::min(s, side) - knot);
    return total;
}

}  // namespace

Eigen::MatrixXd true_structure_design(const SimulationSpec& spec, std::span<const CellIndex> cells,
                                      bool include_step, std::vector<std::string>* names) {
    std::vector<std::string> labels{"intercept", "i", "ln_j", "j"};
    const bool si = spec.has_si();
    if (si && spec.si_dq_taper) labels.push_back("t_taper");
    for (std::size_t k = 0; si && k < spec.si_knots.size(); ++k)
        labels.push_back("si_knot" + std::to_string(k + 1));
    const bool step = include_step && spec.step.has_value();
    if (step) labels.push_back("step");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t r = 0; r < cells.size(); ++r) {
        const auto& c = cells[r];
        const auto row = static_cast<Eigen::Index>(r);
        Eigen::Index col = 0;
        x(row, col++) = 1.0;
        x(row, col++) = c.i;
        x(row, col++) = std::log(static_cast<double>(c.j));
        x(row, col++) = c.j;
        if (si) {
            const double taper = spec.si_taper(c.j);
            if (spec.si_dq_taper) x(row, col++) = taper * c.t();
            for (const auto& knot : spec.si_knots) x(row, col++) = taper * cumulative_ramp(c.t(), spec.side, knot.knot);
        }
        if (step)
            x(row, col++) = (c.i >= spec.step->accident_threshold && c.j >= spec.step->development_threshold) ? 1.0 : 0.0;
    }
    if (names) *names = std::move(labels);
    return x;
}

double gamma_deviance(std::span<const double> y, std::span<const double> mu) {
    if (y.size() != mu.size()) throw InvalidInput("gamma_deviance: length mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) total += 2.0 * ((y[k] - mu[k]) / mu[k] - std::log(y[k] / mu[k]));
    return total;
}

namespace {

void finish(TrueGlm& model, std::span<const double> y) {
    const auto fitted = predict_means(model.past, model.fit);
    model.deviance = gamma_deviance(y, fitted);
    model.future_means = predict_means(model.future, model.fit);
    model.totals = summarize_forecast(model.region, model.future_means);
}

}  // namespace

TrueGlm fit_true_glm(const SimulationSpec& spec, std::span<const double> y, bool include_step) {
    spec.validate();
    const auto past = past_cells(spec.side);
    if (y.size() != past.size()) throw InvalidInput("fit_true_glm: response does not match the triangle");
    TrueGlm model;
    model.spec = spec;
    model.y.assign(y.begin(), y.end());
    model.region = future_cells(spec.side);
    model.past = true_structure_design(spec, past, include_step, &model.names);
    model.future = true_structure_design(spec, model.region.cells, include_step);
    model.fit = fit_gamma_glm(model.past, y);
    if (!model.fit.dropped.empty())
        throw NumericalError("fit_true_glm: singular design (column " +
                             model.names[static_cast<std::size_t>(model.fit.dropped.front())] + ")");
    finish(model, y);
    return model;
}

TrueGlm refit(const TrueGlm& model, std::span<const double> y) {
    TrueGlm out = model;
    out.y.assign(y.begin(), y.end());
    out.fit = fit_gamma_glm(model.past, y);
    if (!out.fit.dropped.empty()) throw NumericalError("refit: singular design");
    finish(out, y);
    return out;
}

BenchmarkResult bootstrap_glm(const TrueGlm& model, double phi, const GateSet& gates, int replications,
                              std::uint64_t root_seed, unsigned workers) {
    gates.validate();
    if (replications < 1) throw InvalidInput("bootstrap_glm: need at least one replication");
    const auto fitted = predict_means(model.past, model.fit);
    const ResidualSet res = residuals(model.y, fitted, phi);

    std::vector<std::optional<ForecastTotals>> totals(static_cast<std::size_t>(replications));
    parallel_for(totals.size(), workers, [&](std::size_t k) {
        Rng rng = make_rng(root_seed, "glm_bootstrap", k + 1);
        const PseudoData data = pseudo_data(fitted, phi, res, rng);
        try {
            totals[k] = refit(model, data.values).totals;
        } catch (const std::exception&) {
            totals[k].reset();
        }
    });

    BenchmarkResult result;
    result.glm_reserve = model.totals.reserve;
    result.replications = replications;
    std::vector<double> kept;
    for (const auto& t : totals) {
        if (!t) {
            ++result.failed;
            continue;
        }
        if (gate_check(*t, model.totals, gates).pass) kept.push_back(t->reserve);
    }
    if (kept.empty()) throw InvalidInput("bootstrap_glm: every replication was censored");
    result.surviving = static_cast<int>(kept.size());
    double mean = 0.0;
    for (double r : kept) mean += r;
    mean /= static_cast<double>(kept.size());
    double var = 0.0;
    for (double r : kept) var += (r - mean) * (r - mean);
    var /= static_cast<double>(kept.size());
    result.glm_mean = mean;
    result.glm_w_pa = std::sqrt(var) / mean;
    return result;
}

}  // namespace reserve_lasso
