#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace reserve_lasso {

// Strictly decreasing penalties lambda^(1) > ... > lambda^(Q).
struct PenaltyPath {
    std::vector<double> lambdas;

    std::size_t size() const noexcept { return lambdas.size(); }
};

// Smallest penalty at which the intercept-only model is optimal, times 1.001.
// `x` must be standardized; weights default to 1.
double lambda_max(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                  std::span<const double> y, std::span<const double> weights = {});

// Geometric sequence from lambda_max down to lambda_max * ratio.
PenaltyPath make_path(double lambda_max, int count, double ratio);

struct SolverOptions {
    double coefficient_tolerance = 1e-7;  // outer IRLS stopping rule
    double sweep_tolerance = 1e-9;        // coordinate descent on the quadratic model
    int max_outer_iterations = 50;
    int max_sweeps = 1000;                // per outer iteration
    int polish_after_sweeps = 50;         // then an exact active-set finish
    bool record_objective = false;
};

// One converged fit of the penalized Poisson log-link regression
//   minimize  sum w (mu - y eta) + lambda * sum_{penalized} |beta_r|,  eta = X beta.
struct PathPoint {
    double lambda = 0.0;
    Eigen::VectorXd beta;
    std::vector<int> active;     // penalized columns with beta != 0
    double deviance = 0.0;       // in-sample Poisson deviance
    std::vector<double> fitted;  // exp(X beta)
    int outer_iterations = 0;
    std::vector<double> objective_trace;  // per outer iteration, when recorded
};

struct PathFit {
    std::vector<PathPoint> points;  // converged prefix of the requested path
    std::size_t requested = 0;

    bool truncated() const noexcept { return points.size() < requested; }
};

// Fits every penalty in order, warm-starting from the previous point. Stops at
// the first penalty that fails to converge; earlier points are kept.
PathFit fit_path(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                 std::span<const double> y, const PenaltyPath& path,
                 std::span<const double> weights = {}, const SolverOptions& options = {});

// Single penalty from a cold start (intercept-only when column 0 is a column of
// ones, zero otherwise). Throws NumericalError on non-convergence.
PathPoint fit_single(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                     std::span<const double> y, double lambda,
                     std::span<const double> weights = {}, const SolverOptions& options = {});

double poisson_objective(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                         std::span<const double> y, std::span<const double> weights,
                         const Eigen::VectorXd& beta, double lambda);

// 2 sum w [y ln(y/mu) - (y - mu)].
double poisson_deviance(std::span<const double> y, std::span<const double> mu,
                        std::span<const double> weights = {});

// Largest violation of the optimality conditions at a path point, using the
// Poisson score X^T w (y - mu).
struct KktReport {
    double inactive_excess = 0.0;  // max(|score| - lambda, 0) over zero penalized terms
    double active_residual = 0.0;  // max |score - lambda sign(beta)| over active terms
    double unpenalized_score = 0.0;

    double worst() const noexcept;
};

KktReport kkt_check(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                    std::span<const double> y, std::span<const double> weights,
                    const PathPoint& point);

struct ModelSelection {
    std::size_t q_min = 0;  // 0-based path index
    std::size_t q_1se = 0;
};

// minCV: first minimizer of the mean loss. 1se: smallest q with
// mean_q <= mean_{q_min} + se_{q_min}.
ModelSelection select_models(std::span<const double> cv_mean, std::span<const double> cv_se);

struct CvResult {
    Eigen::MatrixXd fold_losses;  // Q x folds
    std::vector<double> mean;
    std::vector<double> se;
    std::vector<int> fold_of_cell;
    ModelSelection selection;
};

// K-fold cross-validation by cell with a seeded uniform assignment. Each fold
// refits the same penalty path on its complement; the loss is the Poisson
// deviance on the held-out cells. Only the first `path_length` penalties are
// scored (normally the converged length of the full-data fit). A fold whose
// path stops early is scored with its last converged model beyond that point.
CvResult cross_validate(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                        std::span<const double> y, const PenaltyPath& path, std::size_t path_length,
                        int folds, std::uint64_t seed, std::span<const double> weights = {},
                        const SolverOptions& options = {}, unsigned workers = 1);

}  // namespace reserve_lasso
