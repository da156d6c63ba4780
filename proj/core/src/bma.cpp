#include "reserve_lasso/bma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "reserve_lasso/dispersion.hpp"

namespace reserve_lasso {

std::string_view flavor_name(PriorFlavor flavor) {
    switch (flavor) {
        case PriorFlavor::simple: return "simple";
        case PriorFlavor::onese: return "1se";
        case PriorFlavor::mincv: return "mincv";
        case PriorFlavor::complex: return "complex";
        case PriorFlavor::custom: return "custom";
    }
    return "?";
}

PriorFlavor parse_flavor(std::string_view name) {
    for (auto f : {PriorFlavor::simple, PriorFlavor::onese, PriorFlavor::mincv, PriorFlavor::complex,
                   PriorFlavor::custom})
        if (flavor_name(f) == name) return f;
    throw InvalidInput("unknown prior flavor '" + std::string(name) + "'");
}

double gamma_loglik(std::span<const double> y, std::span<const double> mu, double phi) {
    if (!(phi > 0.0) || !std::isfinite(phi)) throw InvalidInput("gamma_loglik: phi must be positive");
    if (y.size() != mu.size()) throw InvalidInput("gamma_loglik: length mismatch");
    for (std::size_t k = 0; k < y.size(); ++k)
        if (!(y[k] > 0.0) || !(mu[k] > 0.0)) throw InvalidInput("gamma_loglik: nonpositive input");
    return gamma_shape_loglik(y, mu, 1.0 / phi);
}

double l1_norm(const Eigen::VectorXd& beta, const std::vector<bool>& penalized) {
    if (static_cast<std::size_t>(beta.size()) != penalized.size())
        throw InvalidInput("l1_norm: length mismatch");
    double total = 0.0;
    for (Eigen::Index r = 0; r < beta.size(); ++r)
        if (penalized[static_cast<std::size_t>(r)]) total += std::abs(beta[r]);
    return total;
}

double laplace_density(double x, double lambda) {
    if (!(lambda > 0.0)) throw InvalidInput("laplace_density: lambda must be positive");
    return 0.5 * lambda * std::exp(-lambda * std::abs(x));
}

PosteriorDistribution posterior(std::span<const ModelEvidence> models, const PriorSpec& prior) {
    if (models.empty()) throw InvalidInput("posterior: empty model set");
    if (!(prior.lambda_g >= 0.0) || !std::isfinite(prior.lambda_g))
        throw InvalidInput("posterior: lambda_G must be finite and nonnegative");
    PosteriorDistribution post;
    post.prior = prior;
    post.model_ids.reserve(models.size());
    post.log_weights.reserve(models.size());
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& m : models) {
        post.model_ids.push_back(m.model_id);
        post.log_weights.push_back(m.loglik + log_prior(m.l1, prior.lambda_g));
        top = std::max(top, post.log_weights.back());
    }
    if (!std::isfinite(top)) throw NumericalError("posterior: no finite log weight");
    post.probs.resize(models.size());
    double total = 0.0;
    for (std::size_t k = 0; k < models.size(); ++k) {
        post.probs[k] = std::exp(post.log_weights[k] - top);
        total += post.probs[k];
    }
    for (auto& p : post.probs) p /= total;
    return post;
}

UnattainableMode::UnattainableMode(int target, std::vector<int> nearest)
    : InvalidInput([&] {
          std::string msg = "lambda_G calibration: model " + std::to_string(target + 1) +
                            " is never the posterior mode; nearest attainable:";
          for (int q : nearest) msg += " " + std::to_string(q + 1);
          return msg;
      }()),
      target_(target),
      nearest_(std::move(nearest)) {}

ModeInterval mode_interval(std::span<const ModelEvidence> models, int target_model_id) {
    const auto it = std::find_if(models.begin(), models.end(),
                                 [&](const ModelEvidence& m) { return m.model_id == target_model_id; });
    if (it == models.end()) throw InvalidInput("mode_interval: target not in model set");
    ModeInterval interval{kLambdaGMin, kLambdaGMax};
    for (const auto& m : models) {
        if (m.model_id == it->model_id) continue;
        const double dl = m.loglik - it->loglik;
        const double dn = m.l1 - it->l1;
        if (dn > 0.0) {
            interval.lower = std::max(interval.lower, dl / dn);
        } else if (dn < 0.0) {
            interval.upper = std::min(interval.upper, dl / dn);
        } else if (dl > 0.0) {
            return {1.0, 0.0};
        }
    }
    return interval;
}

double calibrate_lambda_g(std::span<const ModelEvidence> models, int target_model_id) {
    const ModeInterval interval = mode_interval(models, target_model_id);
    if (interval.attainable()) return std::sqrt(interval.lower * interval.upper);

    std::vector<int> attainable;
    for (const auto& m : models)
        if (mode_interval(models, m.model_id).attainable()) attainable.push_back(m.model_id);
    int best = std::numeric_limits<int>::max();
    for (int q : attainable) best = std::min(best, std::abs(q - target_model_id));
    std::vector<int> nearest;
    for (int q : attainable)
        if (std::abs(q - target_model_id) == best) nearest.push_back(q);
    std::sort(nearest.begin(), nearest.end());
    throw UnattainableMode(target_model_id, std::move(nearest));
}

double tail_mass(const PosteriorDistribution& post, ExtremeSide side, int threshold_model_id) {
    double mass = 0.0;
    for (std::size_t k = 0; k < post.probs.size(); ++k) {
        const int q = post.model_ids[k];
        if (side == ExtremeSide::simple ? q >= threshold_model_id : q <= threshold_model_id)
            mass += post.probs[k];
    }
    return mass;
}

std::optional<double> find_extreme_lambda(std::span<const ModelEvidence> models, ExtremeSide side,
                                          int threshold_model_id, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("find_extreme_lambda: epsilon outside (0,1)");
    auto excess = [&](double log_lambda) {
        const auto post = posterior(models, {PriorFlavor::custom, std::exp(log_lambda)});
        return tail_mass(post, side, threshold_model_id) - epsilon;
    };
    double lo = std::log(kLambdaGMin);
    double hi = std::log(kLambdaGMax);
    double f_lo = excess(lo);
    const double f_hi = excess(hi);
    if (f_lo == 0.0) return std::exp(lo);
    if (f_hi == 0.0) return std::exp(hi);
    if ((f_lo > 0.0) == (f_hi > 0.0)) return std::nullopt;
    for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = excess(mid);
        if (f_mid == 0.0) return std::exp(mid);
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

PosteriorSummary summarize(const PosteriorDistribution& post, std::span<const double> reserves) {
    if (reserves.size() != post.probs.size()) throw InvalidInput("summarize: reserves not aligned with posterior");
    PosteriorSummary s;
    s.reserves.assign(reserves.begin(), reserves.end());
    s.probs = post.probs;
    for (std::size_t k = 0; k < reserves.size(); ++k) s.mean += post.probs[k] * reserves[k];
    if (!(s.mean > 0.0) || !std::isfinite(s.mean)) throw InvalidInput("summarize: posterior mean must be positive");
    for (std::size_t k = 0; k < reserves.size(); ++k) {
        const double d = reserves[k] - s.mean;
        s.variance += post.probs[k] * d * d;
    }
    s.cov = std::sqrt(s.variance) / s.mean;
    return s;
}

}  // namespace reserve_lasso
