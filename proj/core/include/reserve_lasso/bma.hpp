#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "reserve_lasso/error.hpp"

namespace reserve_lasso {

enum class PriorFlavor { simple, onese, mincv, complex, custom };

std::string_view flavor_name(PriorFlavor flavor);
PriorFlavor parse_flavor(std::string_view name);  // "simple", "1se", "mincv", "complex", "custom"

struct PriorSpec {
    PriorFlavor flavor = PriorFlavor::onese;
    double lambda_g = 1.0;  // Laplace prior dispersion, > 0
};

// What the posterior needs from one path model.
struct ModelEvidence {
    int model_id = 0;
    double loglik = 0.0;  // Gamma log-likelihood at the model's fitted means
    double l1 = 0.0;      // sum of |beta| over penalized columns, standardized scale
};

// Sum over cells of g ln c - ln Gamma(g) + (g-1) ln y - c y, g = 1/phi, c = g/mu.
double gamma_loglik(std::span<const double> y, std::span<const double> mu, double phi);

double l1_norm(const Eigen::VectorXd& beta, const std::vector<bool>& penalized);

// Laplace log-prior up to a model-independent constant.
inline double log_prior(double l1, double lambda_g) { return -lambda_g * l1; }

// lambda/2 exp(-lambda |x|).
double laplace_density(double x, double lambda);

struct PosteriorDistribution {
    PriorSpec prior;
    std::vector<int> model_ids;
    std::vector<double> log_weights;
    std::vector<double> probs;
};

PosteriorDistribution posterior(std::span<const ModelEvidence> models, const PriorSpec& prior);

// Thrown when no lambda_G in [1e-6, 1e6] makes the target the posterior mode.
class UnattainableMode : public InvalidInput {
public:
    UnattainableMode(int target, std::vector<int> nearest);
    int target() const noexcept { return target_; }
    const std::vector<int>& nearest() const noexcept { return nearest_; }

private:
    int target_;
    std::vector<int> nearest_;
};

inline constexpr double kLambdaGMin = 1e-6;
inline constexpr double kLambdaGMax = 1e6;

// Interval of lambda_G over which the target model is the posterior mode.
struct ModeInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool attainable() const noexcept { return lower <= upper; }
};
ModeInterval mode_interval(std::span<const ModelEvidence> models, int target_model_id);

// Log-midpoint of the target's mode interval clipped to [1e-6, 1e6].
double calibrate_lambda_g(std::span<const ModelEvidence> models, int target_model_id);

enum class ExtremeSide { simple, complex };

// Simple side: lambda_G at which the posterior mass of models with id >=
// threshold equals epsilon. Complex side: mass of models with id <= threshold.
// Bisection on ln lambda_G; nullopt when [1e-6, 1e6] does not bracket a root.
std::optional<double> find_extreme_lambda(std::span<const ModelEvidence> models, ExtremeSide side,
                                          int threshold_model_id, double epsilon = 0.0005);

double tail_mass(const PosteriorDistribution& post, ExtremeSide side, int threshold_model_id);

struct PosteriorSummary {
    double mean = 0.0;
    double variance = 0.0;
    double cov = 0.0;
    std::vector<double> reserves;  // aligned with the posterior's model_ids
    std::vector<double> probs;
};

// Posterior mean and variance of the reserve. Throws InvalidInput if the mean
// is not positive.
PosteriorSummary summarize(const PosteriorDistribution& post, std::span<const double> reserves);

}  // namespace reserve_lasso
