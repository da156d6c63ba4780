#include "reserve_lasso/gamma_glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reserve_lasso/error.hpp"

namespace reserve_lasso {
namespace {

using Eigen::Index;
using Eigen::VectorXd;

double kernel(const VectorXd& y, const VectorXd& eta, const VectorXd& w) {
    double total = 0.0;
    for (Index k = 0; k < y.size(); ++k) total -= w[k] * (y[k] * std::exp(-eta[k]) + eta[k]);
    return total;
}

}  // namespace

GlmFit fit_gamma_glm(const Eigen::MatrixXd& x, std::span<const double> y,
                     std::span<const double> weights, const GlmOptions& options) {
    const Index n = x.rows();
    if (n == 0 || x.cols() == 0) throw InvalidInput("fit_gamma_glm: empty design");
    if (static_cast<Index>(y.size()) != n) throw InvalidInput("fit_gamma_glm: response length mismatch");
    for (double v : y)
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("fit_gamma_glm: response must be positive");
    VectorXd w = weights.empty() ? VectorXd::Ones(n)
                                 : VectorXd(Eigen::Map<const VectorXd>(weights.data(), n));
    if (weights.size() && static_cast<Index>(weights.size()) != n)
        throw InvalidInput("fit_gamma_glm: weights length mismatch");
    const VectorXd yv = Eigen::Map<const VectorXd>(y.data(), n);
    const VectorXd root_w = w.cwiseSqrt();

    GlmFit fit;
    // Gamma log-link working weights equal the prior weights, so one
    // factorization serves every iteration.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivot(root_w.asDiagonal() * x);
    pivot.setThreshold(options.rank_tolerance);
    const Index rank = pivot.rank();
    if (rank == 0) throw NumericalError("fit_gamma_glm: design has rank 0");
    const auto& perm = pivot.colsPermutation().indices();
    for (Index k = 0; k < x.cols(); ++k)
        (k < rank ? fit.kept : fit.dropped).push_back(perm[k]);
    std::sort(fit.kept.begin(), fit.kept.end());
    std::sort(fit.dropped.begin(), fit.dropped.end());

    const Eigen::MatrixXd reduced = x(Eigen::all, fit.kept);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(root_w.asDiagonal() * reduced);

    VectorXd eta = yv.array().log();
    VectorXd beta = VectorXd::Zero(rank);
    double current = -std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const VectorXd mu = eta.array().exp();
        const VectorXd z = eta.array() + (yv.array() - mu.array()) / mu.array();
        VectorXd next_beta = qr.solve(VectorXd(root_w.cwiseProduct(z)));
        VectorXd next_eta = reduced * next_beta;
        double next = kernel(yv, next_eta, w);
        if (iter > 1) {
            for (int halving = 0; !(next >= current) && halving < 60; ++halving) {
                next_beta = 0.5 * (next_beta + beta);
                next_eta = 0.5 * (next_eta + eta);
                next = kernel(yv, next_eta, w);
            }
        }
        const double change = std::abs(next - current);
        const double step = iter > 1 ? (next_beta - beta).cwiseAbs().maxCoeff() : 1.0;
        beta = next_beta;
        eta = next_eta;
        fit.iterations = iter;
        if (iter > 1 && change <= options.relative_tolerance * (std::abs(next) + options.relative_tolerance) &&
            step <= options.coefficient_tolerance) {
            current = next;
            fit.converged = true;
            break;
        }
        current = next;
    }
    if (!std::isfinite(current)) throw NumericalError("fit_gamma_glm: log-likelihood diverged");

    fit.coefficients = VectorXd::Zero(x.cols());
    for (Index k = 0; k < rank; ++k) fit.coefficients[fit.kept[k]] = beta[k];
    fit.fitted.resize(n);
    for (Index k = 0; k < n; ++k) fit.fitted[k] = std::exp(eta[k]);
    fit.loglik_kernel = current;
    return fit;
}

std::vector<double> predict_means(const Eigen::MatrixXd& x, const GlmFit& fit) {
    if (x.cols() != fit.coefficients.size()) throw InvalidInput("predict_means: column mismatch");
    const VectorXd eta = x * fit.coefficients;
    std::vector<double> mu(eta.size());
    for (Index k = 0; k < eta.size(); ++k) mu[k] = std::exp(eta[k]);
    return mu;
}

}  // namespace reserve_lasso
