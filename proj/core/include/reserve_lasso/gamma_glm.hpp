#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace reserve_lasso {

struct GlmOptions {
    double relative_tolerance = 1e-10;  // on the Gamma log-likelihood kernel
    double coefficient_tolerance = 1e-10;  // max absolute change, checked as well
    int max_iterations = 100;
    double rank_tolerance = 1e-10;      // pivoted-QR rank threshold
};

struct GlmFit {
    Eigen::VectorXd coefficients;  // one per input column; zero where dropped
    std::vector<int> kept;
    std::vector<int> dropped;      // collinear columns removed by pivoting
    std::vector<double> fitted;
    double loglik_kernel = 0.0;    // -sum w (y/mu + ln mu)
    int iterations = 0;
    bool converged = false;
};

// Unpenalized Gamma regression with log link by IRLS. Collinear columns are
// detected by column-pivoted QR and dropped (reported in `dropped`).
GlmFit fit_gamma_glm(const Eigen::MatrixXd& x, std::span<const double> y,
                     std::span<const double> weights = {}, const GlmOptions& options = {});

// exp(x * coefficients).
std::vector<double> predict_means(const Eigen::MatrixXd& x, const GlmFit& fit);

}  // namespace reserve_lasso
