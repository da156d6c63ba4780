#include "reserve_lasso/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "reserve_lasso/error.hpp"
#include "reserve_lasso/parallel.hpp"

namespace reserve_lasso {

ResidualSet residuals(std::span<const double> y, std::span<const double> mu, double phi) {
    if (y.size() != mu.size() || y.empty()) throw InvalidInput("residuals: length mismatch");
    if (!(phi > 0.0)) throw InvalidInput("residuals: phi must be positive");
    ResidualSet res;
    res.values.resize(y.size());
    const double root_phi = std::sqrt(phi);
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!(mu[k] > 0.0)) throw InvalidInput("residuals: nonpositive fitted mean");
        res.values[k] = (y[k] - mu[k]) / (root_phi * mu[k]);
    }
    res.shift = std::accumulate(res.values.begin(), res.values.end(), 0.0) / static_cast<double>(y.size());
    for (auto& r : res.values) r -= res.shift;
    return res;
}

PseudoData pseudo_data(std::span<const double> mu, double phi, const ResidualSet& res, Rng& rng) {
    if (res.values.empty()) throw InvalidInput("pseudo_data: no residuals");
    std::uniform_int_distribution<std::size_t> pick(0, res.values.size() - 1);
    const double root_phi = std::sqrt(phi);
    PseudoData out;
    out.values.resize(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const double value = mu[k] * (1.0 + root_phi * res.values[pick(rng)]);
        const double floor = kPseudoDataFloor * mu[k];
        if (value < floor) {
            out.values[k] = floor;
            ++out.floor_hits;
        } else {
            out.values[k] = value;
        }
    }
    return out;
}

ReplicationResult run_replication(const BootstrapSetup& setup, std::span<const double> y, int b) {
    if (!setup.design || !setup.future || !setup.region) throw InvalidInput("run_replication: incomplete setup");
    ReplicationResult result;
    result.b = b;
    const auto& x = setup.design->values;
    const auto& pen = setup.design->penalized();
    try {
        const PenaltyPath path = make_path(lambda_max(x, pen, y), setup.path_length, setup.path_ratio);
        const PathFit fit = fit_path(x, pen, y, path, {}, setup.solver);
        result.path_truncated = fit.truncated();
        result.models.reserve(fit.points.size());
        for (std::size_t q = 0; q < fit.points.size(); ++q) {
            const auto& point = fit.points[q];
            ReplicationModel model;
            model.model_id = static_cast<int>(q);
            model.totals = extrapolate(model.model_id, point.beta, *setup.future, *setup.region).totals;
            model.loglik = gamma_loglik(y, point.fitted, setup.phi);
            model.l1 = l1_norm(point.beta, pen);
            result.models.push_back(std::move(model));
        }
        result.alive = !result.models.empty();
        if (!result.alive) result.failure = "no converged path model";
    } catch (const std::exception& e) {
        result.alive = false;
        result.models.clear();
        result.failure = e.what();
    }
    return result;
}

ReplicationResult run_replication(const BootstrapSetup& setup, std::uint64_t root_seed, int b) {
    Rng rng = make_rng(root_seed, "bootstrap", static_cast<std::uint64_t>(b));
    const PseudoData data = pseudo_data(setup.fitted, setup.phi, setup.residuals, rng);
    ReplicationResult result = run_replication(setup, data.values, b);
    result.floor_hits = data.floor_hits;
    return result;
}

std::vector<ReplicationResult> run_bootstrap(const BootstrapSetup& setup, std::uint64_t root_seed,
                                             int replications, unsigned workers) {
    std::vector<ReplicationResult> results(static_cast<std::size_t>(std::max(replications, 0)));
    parallel_for(results.size(), workers, [&](std::size_t k) {
        results[k] = run_replication(setup, root_seed, static_cast<int>(k) + 1);
    });
    return results;
}

int BootstrapMatrix::q_max() const {
    int q = 0;
    for (const auto& row : rows)
        for (int id : row.model_ids) q = std::max(q, id + 1);
    return q;
}

namespace {

std::vector<ModelEvidence> evidence_of(const ReplicationResult& rep, std::span<const std::size_t> keep) {
    std::vector<ModelEvidence> ev;
    ev.reserve(keep.size());
    for (std::size_t k : keep) ev.push_back({rep.models[k].model_id, rep.models[k].loglik, rep.models[k].l1});
    return ev;
}

}  // namespace

BootstrapMatrix assemble(std::span<const ReplicationResult> replications, const ForecastTotals& primary,
                         double primary_posterior_mean, const GateSet& final_gates,
                         const GateSet& temporary_gates, const PriorSpec& prior,
                         const AssemblyOptions& options) {
    if (!(primary_posterior_mean > 0.0)) throw InvalidInput("assemble: primary posterior mean must be positive");
    std::vector<const ReplicationResult*> order;
    for (const auto& r : replications) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->b < b->b; });

    BootstrapMatrix matrix;
    matrix.prior = prior;
    matrix.replications = static_cast<int>(order.size());

    struct Provisional {
        const ReplicationResult* rep;
        std::vector<std::size_t> keep;
    };
    std::vector<Provisional> live;
    double mean_sum = 0.0;
    for (const auto* rep : order) {
        if (!rep->alive) {
            ++matrix.dead;
            continue;
        }
        Provisional p{rep, {}};
        for (std::size_t k = 0; k < rep->models.size(); ++k) {
            const GateResult g = gate_check(rep->models[k].totals, primary, temporary_gates);
            for (std::size_t a = 0; a < kAggregateCount; ++a)
                if (!g.passed[a]) ++matrix.temporary_censored[a];
            if (g.pass) p.keep.push_back(k);
        }
        if (p.keep.empty()) {
            ++matrix.dead;
            continue;
        }
        const auto post = posterior(evidence_of(*rep, p.keep), prior);
        double m = 0.0;
        for (std::size_t k = 0; k < p.keep.size(); ++k) m += post.probs[k] * rep->models[p.keep[k]].totals.reserve;
        mean_sum += m;
        live.push_back(std::move(p));
    }
    if (live.empty()) throw InvalidInput("assemble: no live replication");
    matrix.provisional_mean = mean_sum / static_cast<double>(live.size());
    matrix.scale_factor = primary_posterior_mean / matrix.provisional_mean;

    for (const auto& p : live) {
        std::vector<std::size_t> keep;
        std::vector<double> reserves;
        for (std::size_t k : p.keep) {
            const ForecastTotals scaled = p.rep->models[k].totals.scaled(matrix.scale_factor);
            const GateResult g = gate_check(scaled, primary, final_gates);
            for (std::size_t a = 0; a < kAggregateCount; ++a)
                if (!g.passed[a]) ++matrix.final_censored[a];
            if (g.pass) {
                keep.push_back(k);
                reserves.push_back(scaled.reserve);
            }
        }
        if (keep.empty()) {
            ++matrix.sparse;
            continue;
        }
        const auto post = posterior(evidence_of(*p.rep, keep), prior);
        const auto heavy = std::count_if(post.probs.begin(), post.probs.end(),
                                         [&](double pr) { return pr > options.min_prob; });
        if (heavy < options.min_models) {
            ++matrix.sparse;
            continue;
        }
        const auto summary = summarize(post, reserves);
        BootstrapRow row;
        row.b = p.rep->b;
        row.model_ids = post.model_ids;
        row.reserves = std::move(reserves);
        row.probs = post.probs;
        row.mean = summary.mean;
        row.cov = summary.cov;
        row.s2 = (summary.mean * summary.cov) * (summary.mean * summary.cov);
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

ErrorDecomposition combine(double w_imse, double w_pa, double w_pr) {
    ErrorDecomposition d;
    d.w_imse = w_imse;
    d.w_pa = w_pa;
    d.w_pr = w_pr;
    d.w_pa_imse = std::sqrt(w_pa * w_pa + w_imse * w_imse);
    d.w_subtotal = std::sqrt(d.w_pa_imse * d.w_pa_imse + w_pr * w_pr);
    return d;
}

ErrorDecomposition decompose(std::span<const BootstrapRow> rows, double process_cov) {
    if (rows.size() < 2) throw InvalidInput("decompose: need at least two bootstrap rows");
    std::vector<const BootstrapRow*> order;
    for (const auto& r : rows) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->b < b->b; });
    const double n = static_cast<double>(order.size());
    double m = 0.0;
    double s2_imse = 0.0;
    for (const auto* r : order) {
        m += r->mean;
        s2_imse += r->s2;
    }
    m /= n;
    s2_imse /= n;
    double s2_pa = 0.0;
    for (const auto* r : order) s2_pa += (r->mean - m) * (r->mean - m);
    s2_pa /= n;
    if (!(m > 0.0)) throw InvalidInput("decompose: mean reserve must be positive");
    ErrorDecomposition d = combine(std::sqrt(s2_imse) / m, std::sqrt(s2_pa) / m, process_cov);
    d.m = m;
    d.s2_imse = s2_imse;
    d.s2_pa = s2_pa;
    d.n_surviving = static_cast<int>(order.size());
    return d;
}

double process_error(std::span<const double> future_means, double phi, int simulations,
                     std::uint64_t root_seed) {
    if (simulations < 2) throw InvalidInput("process_error: need at least two simulations");
    if (!(phi > 0.0)) throw InvalidInput("process_error: phi must be positive");
    for (double mu : future_means)
        if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInput("process_error: forecasts must be positive");
    Rng rng = make_rng(root_seed, "process");
    const double shape = 1.0 / phi;
    std::vector<std::gamma_distribution<double>> cells;
    cells.reserve(future_means.size());
    for (double mu : future_means) cells.emplace_back(shape, mu * phi);
    double mean = 0.0;
    double m2 = 0.0;
    for (int s = 0; s < simulations; ++s) {
        double total = 0.0;
        for (auto& g : cells) total += g(rng);
        const double delta = total - mean;
        mean += delta / (s + 1);
        m2 += delta * (total - mean);
    }
    return std::sqrt(m2 / (simulations - 1)) / mean;
}

}  // namespace reserve_lasso
