#include "reserve_lasso/dispersion.hpp"

#include <cmath>

#include "reserve_lasso/error.hpp"
#include "reserve_lasso/special_functions.hpp"

namespace reserve_lasso {

double gamma_shape_loglik(std::span<const double> y, std::span<const double> mu, double shape) {
    if (y.size() != mu.size()) throw InvalidInput("gamma_shape_loglik: length mismatch");
    double total = 0.0;
    const double log_gamma = std::lgamma(shape);
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double rate = shape / mu[k];
        total += shape * std::log(rate) - log_gamma + (shape - 1.0) * std::log(y[k]) - rate * y[k];
    }
    return total;
}

DispersionEstimate phi_mle(std::span<const double> y, std::span<const double> mu) {
    if (y.empty() || y.size() != mu.size()) throw InvalidInput("phi_mle: need matching non-empty inputs");
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!(y[k] > 0.0) || !(mu[k] > 0.0)) throw InvalidInput("phi_mle: inputs must be positive");
        const double u = y[k] / mu[k] - 1.0;
        s += u - std::log1p(u);
    }
    const double n = static_cast<double>(y.size());
    s /= n;
    if (!(s > 0.0) || !std::isfinite(s))
        throw NumericalError("phi_mle: non-positive deviance statistic (fitted means equal data)");

    // f(theta) = L(e^theta) - s is strictly decreasing in theta.
    auto f = [s](double theta) { return log_minus_digamma(std::exp(theta)) - s; };
    double theta = std::log((3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s));
    double lo = theta, hi = theta;
    while (f(lo) < 0.0) lo -= 1.0;
    while (f(hi) > 0.0) hi += 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double g = std::exp(theta);
        const double value = f(theta);
        if (value == 0.0) break;
        (value > 0.0 ? lo : hi) = theta;
        const double slope = 1.0 - g * trigamma(g);
        double next = theta - value / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - theta) < 1e-15 * std::max(1.0, std::abs(theta))) {
            theta = next;
            break;
        }
        theta = next;
    }

    DispersionEstimate estimate;
    estimate.shape = std::exp(theta);
    estimate.phi = 1.0 / estimate.shape;
    estimate.stationarity_residual = n * f(theta);
    return estimate;
}

GlmFit fit_structure(const DesignMatrix& design, std::span<const int> structure,
                     std::span<const double> y, std::span<const double> weights) {
    std::vector<int> columns{0};
    for (int c : structure)
        if (c != 0) columns.push_back(c);
    const Eigen::MatrixXd x = design.values(Eigen::all, columns);
    GlmFit reduced = fit_gamma_glm(x, y, weights);
    // Report kept/dropped in design-column numbering.
    for (auto& k : reduced.kept) k = columns[k];
    for (auto& k : reduced.dropped) k = columns[k];
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.cols()));
    for (std::size_t k = 0; k < columns.size(); ++k) full[columns[k]] = reduced.coefficients[k];
    reduced.coefficients = std::move(full);
    return reduced;
}

DispersionEstimate estimate_dispersion(const DesignMatrix& design, std::span<const int> structure,
                                       std::span<const double> y, std::span<const double> weights) {
    const GlmFit glm = fit_structure(design, structure, y, weights);
    DispersionEstimate estimate = phi_mle(y, glm.fitted);
    estimate.source_structure = glm.kept;
    return estimate;
}

}  // namespace reserve_lasso
