#pragma once

#include <span>
#include <vector>

#include "reserve_lasso/basis.hpp"
#include "reserve_lasso/gamma_glm.hpp"

namespace reserve_lasso {

struct DispersionEstimate {
    double phi = 0.0;
    double shape = 0.0;  // 1 / phi
    std::vector<int> source_structure;  // design columns of the refitted model
    double stationarity_residual = 0.0;
};

// Gamma log-likelihood summed over cells as a function of the shape, with
// the means held fixed (rate c = shape / mu).
double gamma_shape_loglik(std::span<const double> y, std::span<const double> mu, double shape);

// Maximum-likelihood dispersion with the means held fixed: solves
// ln(g) - digamma(g) = mean[(y/mu - 1) - ln(y/mu)] for the shape g by
// bracketed Newton on ln(g).
DispersionEstimate phi_mle(std::span<const double> y, std::span<const double> mu);

// Unpenalized Gamma GLM on the intercept plus `structure` columns of `design`.
GlmFit fit_structure(const DesignMatrix& design, std::span<const int> structure,
                     std::span<const double> y, std::span<const double> weights = {});

// Refit of a path model's structure followed by phi_mle on the GLM means.
DispersionEstimate estimate_dispersion(const DesignMatrix& design, std::span<const int> structure,
                                       std::span<const double> y,
                                       std::span<const double> weights = {});

}  // namespace reserve_lasso
