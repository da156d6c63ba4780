#include "reserve_lasso/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <optional>

#include "reserve_lasso/error.hpp"
#include "reserve_lasso/parallel.hpp"
#include "reserve_lasso/rng.hpp"

namespace reserve_lasso {
namespace {

using Eigen::Index;
using Eigen::VectorXd;

VectorXd weight_vector(std::span<const double> weights, Index n) {
    if (weights.empty()) return VectorXd::Ones(n);
    if (static_cast<Index>(weights.size()) != n) throw InvalidInput("weights length mismatch");
    return Eigen::Map<const VectorXd>(weights.data(), n);
}

void check_problem(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                   std::span<const double> y) {
    if (x.rows() == 0 || x.cols() == 0) throw InvalidInput("lasso: empty design");
    if (static_cast<Index>(y.size()) != x.rows()) throw InvalidInput("lasso: response length mismatch");
    if (static_cast<Index>(penalized.size()) != x.cols())
        throw InvalidInput("lasso: penalty mask length mismatch");
    for (double v : y)
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("lasso: response must be non-negative");
}

bool is_ones_column(const Eigen::MatrixXd& x, Index c) {
    return (x.col(c).array() == 1.0).all();
}

constexpr double kRankThreshold = 1e-10;

double soft_threshold(double u, double lambda) {
    if (u > lambda) return u - lambda;
    if (u < -lambda) return u + lambda;
    return 0.0;
}

// IRLS outer loop with coordinate descent on each weighted least-squares
// subproblem. State persists between calls so a path is warm-started.
class PoissonLasso {
public:
    PoissonLasso(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                 std::span<const double> y, std::span<const double> weights)
        : x_(x),
          penalized_(penalized),
          y_(Eigen::Map<const VectorXd>(y.data(), static_cast<Index>(y.size()))),
          w_(weight_vector(weights, x.rows())),
          beta_(VectorXd::Zero(x.cols())),
          eta_(VectorXd::Zero(x.rows())) {
        if (!penalized_[0] && is_ones_column(x_, 0)) {
            const double mean = w_.dot(y_) / w_.sum();
            if (!(mean > 0.0)) throw InvalidInput("lasso: all-zero response");
            beta_[0] = std::log(mean);
            eta_.setConstant(beta_[0]);
        }
    }

    const VectorXd& beta() const { return beta_; }
    const VectorXd& eta() const { return eta_; }

    double objective(const VectorXd& eta, const VectorXd& beta, double lambda) const {
        double loss = 0.0;
        for (Index k = 0; k < eta.size(); ++k) loss += w_[k] * (std::exp(eta[k]) - y_[k] * eta[k]);
        double penalty = 0.0;
        for (Index c = 0; c < beta.size(); ++c)
            if (penalized_[c]) penalty += std::abs(beta[c]);
        return loss + lambda * penalty;
    }

    // Returns the number of outer iterations on success.
    std::optional<int> solve(double lambda, const SolverOptions& options,
                             std::vector<double>* trace) {
        const Index n = x_.rows(), p = x_.cols();
        VectorXd weight(n), v(n), h(p);
        std::vector<char> h_ready(p);
        double current = objective(eta_, beta_, lambda);

        for (int outer = 1; outer <= options.max_outer_iterations; ++outer) {
            const VectorXd mu = eta_.array().exp();
            weight = w_.array() * mu.array();
            v = w_.array() * (y_ - mu).array();  // weight * working residual
            std::fill(h_ready.begin(), h_ready.end(), 0);
            const VectorXd start = beta_;

            auto curvature = [&](Index c) {
                if (!h_ready[c]) {
                    h[c] = weight.dot(x_.col(c).cwiseAbs2());
                    h_ready[c] = 1;
                }
                return h[c];
            };
            auto update = [&](Index c) {
                const double g = x_.col(c).dot(v);
                double next;
                if (!penalized_[c]) {
                    next = beta_[c] + g / curvature(c);
                } else if (beta_[c] == 0.0) {
                    if (std::abs(g) <= lambda) return 0.0;
                    next = soft_threshold(g, lambda) / curvature(c);
                } else {
                    const double hc = curvature(c);
                    next = soft_threshold(g + hc * beta_[c], lambda) / hc;
                }
                const double delta = next - beta_[c];
                if (delta != 0.0) {
                    v.noalias() -= delta * weight.cwiseProduct(x_.col(c));
                    beta_[c] = next;
                }
                return std::abs(delta);
            };

            int sweeps = 0;
            auto descend = [&](int limit) {
                for (;;) {
                    if (sweeps >= limit) return false;
                    double change = 0.0;
                    for (Index c = 0; c < p; ++c) change = std::max(change, update(c));
                    ++sweeps;
                    if (change < options.sweep_tolerance) return true;
                    std::vector<Index> active;
                    for (Index c = 0; c < p; ++c)
                        if (!penalized_[c] || beta_[c] != 0.0) active.push_back(c);
                    for (;;) {
                        if (sweeps >= limit) return false;
                        double active_change = 0.0;
                        for (Index c : active) active_change = std::max(active_change, update(c));
                        ++sweeps;
                        if (active_change < options.sweep_tolerance) break;
                    }
                }
            };
            const int polish_at = std::min(options.polish_after_sweeps, options.max_sweeps);
            bool solved = descend(polish_at);
            if (!solved && options.polish_after_sweeps < options.max_sweeps) {
                solved = feature_sign(lambda, weight, v);
                if (!solved) solved = descend(options.max_sweeps);
            }
            if (!solved) return std::nullopt;

            VectorXd candidate_eta = predictor(beta_);
            double candidate = objective(candidate_eta, beta_, lambda);
            // Step halving keeps the true objective non-increasing.
            const double slack = 1e-12 * std::max(1.0, std::abs(current));
            for (int halving = 0; !(candidate <= current + slack) && halving < 60; ++halving) {
                beta_ = 0.5 * (beta_ + start);
                candidate_eta = 0.5 * (candidate_eta + eta_);
                candidate = objective(candidate_eta, beta_, lambda);
            }
            if (!(candidate <= current + slack)) return std::nullopt;

            const double step = (beta_ - start).cwiseAbs().maxCoeff();
            eta_ = predictor(beta_);
            current = objective(eta_, beta_, lambda);
            if (trace) trace->push_back(current);
            if (!std::isfinite(current)) return std::nullopt;
            if (step < options.coefficient_tolerance) return outer;
        }
        return std::nullopt;
    }

    void restore(const VectorXd& beta, const VectorXd& eta) {
        beta_ = beta;
        eta_ = eta;
    }

    PathPoint snapshot(double lambda, int iterations, std::vector<double> trace) const {
        PathPoint point;
        point.lambda = lambda;
        point.beta = beta_;
        for (Index c = 0; c < beta_.size(); ++c)
            if (penalized_[c] && beta_[c] != 0.0) point.active.push_back(static_cast<int>(c));
        point.fitted.resize(eta_.size());
        for (Index k = 0; k < eta_.size(); ++k) point.fitted[k] = std::exp(eta_[k]);
        const std::span<const double> y(y_.data(), static_cast<std::size_t>(y_.size()));
        const std::span<const double> w(w_.data(), static_cast<std::size_t>(w_.size()));
        point.deviance = poisson_deviance(y, point.fitted, w);
        point.outer_iterations = iterations;
        point.objective_trace = std::move(trace);
        return point;
    }

private:
    // Exact minimizer of the penalized quadratic model
    //   0.5 sum weight (z - X beta)^2 + lambda |beta|_pen
    // by feature-sign search from the current beta. `v` holds
    // weight * (z - X beta) and is kept in sync. Returns false when the
    // reduced Hessian is unusable or the iteration budget runs out.
    bool feature_sign(double lambda, const VectorXd& weight, VectorXd& v) {
        const Index p = x_.cols();
        std::vector<Index> set;
        for (Index c = 0; c < p; ++c)
            if (!penalized_[c] || beta_[c] != 0.0) set.push_back(c);
        VectorXd theta = VectorXd::Zero(p);
        for (Index c : set)
            if (penalized_[c]) theta[c] = beta_[c] > 0.0 ? 1.0 : -1.0;
        const double add_slack = 1e-9 * std::max(1.0, lambda);
        const int budget = 20 + 4 * static_cast<int>(std::min<Index>(p, 500));

        for (int iter = 0; iter < budget; ++iter) {
            for (int inner = 0; inner < budget && !set.empty(); ++inner) {
                if (!reduce_to_full_rank(set, theta, weight)) return false;
                const Index m = static_cast<Index>(set.size());
                const Eigen::MatrixXd xa = x_(Eigen::all, set);
                const Eigen::MatrixXd wxa = weight.asDiagonal() * xa;
                const Eigen::MatrixXd hess = xa.transpose() * wxa;
                VectorXd rhs = xa.transpose() * v;
                const VectorXd grad = rhs;
                for (Index k = 0; k < m; ++k) rhs[k] -= lambda * theta[set[k]];
                Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
                if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
                const VectorXd d = ldlt.solve(rhs);
                if (!d.allFinite() || (hess * d - rhs).norm() > 1e-8 * (rhs.norm() + 1e-300)) return false;

                const VectorXd hd = hess * d;
                const double dhd = d.dot(hd);
                const double gd = grad.dot(d);
                auto model = [&](double t) {
                    double pen = 0.0;
                    for (Index k = 0; k < m; ++k)
                        if (penalized_[set[k]]) pen += std::abs(beta_[set[k]] + t * d[k]);
                    return -t * gd + 0.5 * t * t * dhd + lambda * pen;
                };
                double best_t = 1.0;
                double best = model(1.0);
                Index crossing = -1;
                for (Index k = 0; k < m; ++k) {
                    const Index c = set[k];
                    if (!penalized_[c] || beta_[c] == 0.0 || d[k] == 0.0) continue;
                    const double t = -beta_[c] / d[k];
                    if (!(t > 0.0 && t < 1.0)) continue;
                    const double value = model(t);
                    if (value < best) {
                        best = value;
                        best_t = t;
                        crossing = k;
                    }
                }
                for (Index k = 0; k < m; ++k) beta_[set[k]] += best_t * d[k];
                v.noalias() -= best_t * (wxa * d);
                if (crossing >= 0) beta_[set[crossing]] = 0.0;

                std::vector<Index> kept;
                for (Index c : set) {
                    if (penalized_[c] && beta_[c] == 0.0) {
                        theta[c] = 0.0;
                        continue;
                    }
                    if (penalized_[c]) theta[c] = beta_[c] > 0.0 ? 1.0 : -1.0;
                    kept.push_back(c);
                }
                set = std::move(kept);
                if (crossing < 0) break;
            }

            const VectorXd g = x_.transpose() * v;
            Index enter = -1;
            double worst = lambda + add_slack;
            for (Index c = 0; c < p; ++c) {
                if (!penalized_[c] || beta_[c] != 0.0) continue;
                if (std::abs(g[c]) > worst) {
                    worst = std::abs(g[c]);
                    enter = c;
                }
            }
            if (enter < 0) return true;
            theta[enter] = g[enter] > 0.0 ? 1.0 : -1.0;
            set.push_back(enter);
        }
        return false;
    }

    // Moves beta along null directions of the weighted active columns, which
    // leaves the fit unchanged, in the direction that does not increase the L1
    // norm, until a coordinate reaches zero and leaves the set. Ends with a
    // full-rank active set.
    bool reduce_to_full_rank(std::vector<Index>& set, VectorXd& theta, const VectorXd& weight) {
        if (set.empty()) return true;
        const Eigen::MatrixXd wxa = weight.cwiseSqrt().asDiagonal() * x_(Eigen::all, set);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(wxa.transpose() * wxa);
        lu.setThreshold(kRankThreshold);
        if (lu.rank() == static_cast<Index>(set.size())) return true;
        Eigen::MatrixXd null_basis = lu.kernel();

        while (null_basis.cols() > 0) {
            VectorXd nv = null_basis.col(0);
            const Index m = nv.size();
            int orientation = 0;
            for (Index k = 0; k < m; ++k) {
                const Index c = set[k];
                if (!penalized_[c] || beta_[c] != 0.0 || std::abs(nv[k]) < 1e-12) continue;
                const int want = theta[c] * nv[k] > 0.0 ? 1 : -1;
                if (orientation != 0 && want != orientation) return false;
                orientation = want;
            }
            if (orientation == 0) {
                double slope = 0.0;
                for (Index k = 0; k < m; ++k)
                    if (penalized_[set[k]]) slope += theta[set[k]] * nv[k];
                orientation = slope > 0.0 ? -1 : 1;
            }
            nv *= orientation;

            double step = std::numeric_limits<double>::infinity();
            Index leave = -1;
            for (Index k = 0; k < m; ++k) {
                const Index c = set[k];
                if (!penalized_[c] || beta_[c] == 0.0 || beta_[c] * nv[k] >= 0.0) continue;
                const double s = -beta_[c] / nv[k];
                if (s < step) {
                    step = s;
                    leave = k;
                }
            }
            if (leave < 0) return false;
            for (Index k = 0; k < m; ++k) beta_[set[k]] += step * nv[k];
            beta_[set[leave]] = 0.0;
            theta[set[leave]] = 0.0;
            for (Index k = 0; k < m; ++k)
                if (k != leave && penalized_[set[k]] && beta_[set[k]] != 0.0)
                    theta[set[k]] = beta_[set[k]] > 0.0 ? 1.0 : -1.0;

            // Kernel of the reduced set: combinations vanishing at `leave`.
            Index pivot = 0;
            for (Index c = 1; c < null_basis.cols(); ++c)
                if (std::abs(null_basis(leave, c)) > std::abs(null_basis(leave, pivot))) pivot = c;
            const VectorXd pcol = null_basis.col(pivot);
            const double pval = pcol[leave];
            Eigen::MatrixXd next(m - 1, null_basis.cols() - 1);
            Index out = 0;
            for (Index c = 0; c < null_basis.cols(); ++c) {
                if (c == pivot) continue;
                VectorXd col = null_basis.col(c) - (null_basis(leave, c) / pval) * pcol;
                const double norm = col.norm();
                if (norm > 0.0) col /= norm;
                Index r = 0;
                for (Index k = 0; k < m; ++k)
                    if (k != leave) next(r++, out) = col[k];
                ++out;
            }
            null_basis = next.leftCols(out);
            set.erase(set.begin() + leave);
        }
        // Zero coefficients that met zero together with the leaving one.
        std::vector<Index> kept;
        for (Index c : set)
            if (!penalized_[c] || beta_[c] != 0.0 || theta[c] != 0.0) kept.push_back(c);
        set = std::move(kept);
        return true;
    }

    VectorXd predictor(const VectorXd& beta) const {
        VectorXd eta = VectorXd::Zero(x_.rows());
        for (Index c = 0; c < beta.size(); ++c)
            if (beta[c] != 0.0) eta.noalias() += beta[c] * x_.col(c);
        return eta;
    }

    const Eigen::MatrixXd& x_;
    const std::vector<bool>& penalized_;
    VectorXd y_;
    VectorXd w_;
    VectorXd beta_;
    VectorXd eta_;
};

}  // namespace

double lambda_max(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                  std::span<const double> y, std::span<const double> weights) {
    check_problem(x, penalized, y);
    const Eigen::Map<const VectorXd> yv(y.data(), static_cast<Index>(y.size()));
    const VectorXd w = weight_vector(weights, x.rows());
    const double mean = w.dot(yv) / w.sum();
    if (!(mean > 0.0)) throw InvalidInput("lambda_max: all-zero response");
    const VectorXd residual = w.array() * (yv.array() - mean);
    double best = 0.0;
    for (Index c = 0; c < x.cols(); ++c)
        if (penalized[c]) best = std::max(best, std::abs(x.col(c).dot(residual)));
    return best * 1.001;
}

PenaltyPath make_path(double lambda_max, int count, double ratio) {
    if (count < 2) throw InvalidInput("make_path: need at least 2 penalties");
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("make_path: ratio must lie in (0,1)");
    if (!(lambda_max > 0.0)) throw InvalidInput("make_path: lambda_max must be positive");
    PenaltyPath path;
    path.lambdas.resize(count);
    const double log_step = std::log(ratio) / (count - 1);
    for (int q = 0; q < count; ++q) path.lambdas[q] = lambda_max * std::exp(log_step * q);
    path.lambdas.back() = lambda_max * ratio;
    return path;
}

PathFit fit_path(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                 std::span<const double> y, const PenaltyPath& path,
                 std::span<const double> weights, const SolverOptions& options) {
    check_problem(x, penalized, y);
    PoissonLasso solver(x, penalized, y, weights);
    PathFit fit;
    fit.requested = path.size();
    fit.points.reserve(path.size());
    for (double lambda : path.lambdas) {
        std::vector<double> trace;
        auto iterations = solver.solve(lambda, options, options.record_objective ? &trace : nullptr);
        if (!iterations) break;
        fit.points.push_back(solver.snapshot(lambda, *iterations, std::move(trace)));
    }
    return fit;
}

PathPoint fit_single(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                     std::span<const double> y, double lambda, std::span<const double> weights,
                     const SolverOptions& options) {
    check_problem(x, penalized, y);
    PoissonLasso solver(x, penalized, y, weights);
    std::vector<double> trace;
    auto iterations = solver.solve(lambda, options, options.record_objective ? &trace : nullptr);
    if (!iterations) throw NumericalError("fit_single: solver did not converge");
    return solver.snapshot(lambda, *iterations, std::move(trace));
}

double poisson_objective(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                         std::span<const double> y, std::span<const double> weights,
                         const Eigen::VectorXd& beta, double lambda) {
    check_problem(x, penalized, y);
    const VectorXd w = weight_vector(weights, x.rows());
    const VectorXd eta = x * beta;
    double value = 0.0;
    for (Index k = 0; k < eta.size(); ++k) value += w[k] * (std::exp(eta[k]) - y[k] * eta[k]);
    for (Index c = 0; c < beta.size(); ++c)
        if (penalized[c]) value += lambda * std::abs(beta[c]);
    return value;
}

double poisson_deviance(std::span<const double> y, std::span<const double> mu,
                        std::span<const double> weights) {
    if (y.size() != mu.size()) throw InvalidInput("poisson_deviance: length mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double w = weights.empty() ? 1.0 : weights[k];
        const double term = y[k] > 0.0 ? y[k] * std::log(y[k] / mu[k]) : 0.0;
        total += w * (term - (y[k] - mu[k]));
    }
    return 2.0 * total;
}

double KktReport::worst() const noexcept {
    return std::max({inactive_excess, active_residual, unpenalized_score});
}

KktReport kkt_check(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                    std::span<const double> y, std::span<const double> weights,
                    const PathPoint& point) {
    check_problem(x, penalized, y);
    const VectorXd w = weight_vector(weights, x.rows());
    const VectorXd eta = x * point.beta;
    VectorXd residual(x.rows());
    for (Index k = 0; k < x.rows(); ++k) residual[k] = w[k] * (y[k] - std::exp(eta[k]));
    const VectorXd score = x.transpose() * residual;
    KktReport report;
    for (Index c = 0; c < x.cols(); ++c) {
        if (!penalized[c]) {
            report.unpenalized_score = std::max(report.unpenalized_score, std::abs(score[c]));
        } else if (point.beta[c] == 0.0) {
            report.inactive_excess =
                std::max(report.inactive_excess, std::abs(score[c]) - point.lambda);
        } else {
            const double target = point.lambda * (point.beta[c] > 0 ? 1.0 : -1.0);
            report.active_residual = std::max(report.active_residual, std::abs(score[c] - target));
        }
    }
    return report;
}

ModelSelection select_models(std::span<const double> cv_mean, std::span<const double> cv_se) {
    if (cv_mean.empty() || cv_mean.size() != cv_se.size())
        throw InvalidInput("select_models: need matching non-empty CV mean and SE");
    ModelSelection selection;
    for (std::size_t q = 1; q < cv_mean.size(); ++q)
        if (cv_mean[q] < cv_mean[selection.q_min]) selection.q_min = q;
    const double bound = cv_mean[selection.q_min] + cv_se[selection.q_min];
    selection.q_1se = selection.q_min;
    for (std::size_t q = 0; q < selection.q_min; ++q) {
        if (cv_mean[q] <= bound) {
            selection.q_1se = q;
            break;
        }
    }
    return selection;
}

CvResult cross_validate(const Eigen::MatrixXd& x, const std::vector<bool>& penalized,
                        std::span<const double> y, const PenaltyPath& path, std::size_t path_length,
                        int folds, std::uint64_t seed, std::span<const double> weights,
                        const SolverOptions& options, unsigned workers) {
    check_problem(x, penalized, y);
    const auto n = static_cast<std::size_t>(x.rows());
    if (folds < 2) throw InvalidInput("cross_validate: need at least 2 folds");
    if (n < static_cast<std::size_t>(folds))
        throw InvalidInput("cross_validate: fewer cells than folds");
    path_length = std::min(path_length, path.size());
    if (path_length == 0) throw InvalidInput("cross_validate: empty path");

    CvResult result;
    {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        auto rng = make_rng(seed, "cv");
        std::shuffle(order.begin(), order.end(), rng);
        result.fold_of_cell.assign(n, 0);
        for (std::size_t pos = 0; pos < n; ++pos) result.fold_of_cell[order[pos]] = pos % folds;
    }

    const VectorXd w = weight_vector(weights, x.rows());
    result.fold_losses.resize(static_cast<Index>(path_length), folds);
    PenaltyPath scored{std::vector<double>(path.lambdas.begin(), path.lambdas.begin() + path_length)};

    parallel_for(static_cast<std::size_t>(folds), workers, [&](std::size_t fold) {
        std::vector<Index> train, test;
        for (std::size_t k = 0; k < n; ++k)
            (result.fold_of_cell[k] == static_cast<int>(fold) ? test : train).push_back(k);
        if (train.empty()) throw InvalidInput("cross_validate: fold with empty training set");

        const Eigen::MatrixXd x_train = x(train, Eigen::all);
        const Eigen::MatrixXd x_test = x(test, Eigen::all);
        std::vector<double> y_train, y_test, w_train, w_test;
        for (Index k : train) y_train.push_back(y[k]), w_train.push_back(w[k]);
        for (Index k : test) y_test.push_back(y[k]), w_test.push_back(w[k]);

        const PathFit fit = fit_path(x_train, penalized, y_train, scored, w_train, options);
        if (fit.points.empty()) throw NumericalError("cross_validate: fold fit failed at the first penalty");
        std::vector<double> mu(test.size());
        for (std::size_t q = 0; q < path_length; ++q) {
            const auto& point = fit.points[std::min(q, fit.points.size() - 1)];
            const VectorXd eta = x_test * point.beta;
            for (std::size_t k = 0; k < test.size(); ++k) mu[k] = std::exp(eta[static_cast<Index>(k)]);
            result.fold_losses(static_cast<Index>(q), static_cast<Index>(fold)) =
                poisson_deviance(y_test, mu, w_test);
        }
    });

    result.mean.resize(path_length);
    result.se.resize(path_length);
    for (std::size_t q = 0; q < path_length; ++q) {
        const auto row = result.fold_losses.row(static_cast<Index>(q));
        const double mean = row.mean();
        const double ss = (row.array() - mean).square().sum();
        result.mean[q] = mean;
        result.se[q] = std::sqrt(ss / (folds - 1)) / std::sqrt(static_cast<double>(folds));
    }
    result.selection = select_models(result.mean, result.se);
    return result;
}

}  // namespace reserve_lasso
