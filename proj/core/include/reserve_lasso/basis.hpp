#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reserve_lasso/triangle.hpp"

namespace reserve_lasso {

double ramp(double x, double knot);        // max(0, x - knot)
double heaviside(double x, double threshold);  // 1 if x >= threshold

enum class BasisKind { intercept, ramp_i, ramp_j, ramp_t, hs_ij, hs_it, hs_tj };

// One covariate of the spline basis. Ramps use first_knot only; Heaviside
// products H_a(u) H_b(v) use (first_knot, second_knot) = (a, b) with the
// variable pair implied by the kind (ij, it, tj).
struct BasisFunction {
    BasisKind kind = BasisKind::intercept;
    int first_knot = 0;
    int second_knot = 0;

    double evaluate(const CellIndex& cell) const;
    std::string label() const;
    bool operator==(const BasisFunction&) const = default;
};

// Intercept, ramps R_K(i), R_K(j), R_K(t) for K = 0..I-1, then Heaviside
// products over indices 2..I. Order depends only on I.
std::vector<BasisFunction> build_basis(int side);

// Columns kept after assembly on the past cells and the standardization that
// was applied to them. Column 0 is always the unpenalized, unscaled intercept.
struct ColumnStats {
    std::vector<BasisFunction> columns;
    std::vector<double> means;
    std::vector<double> sds;
    std::vector<bool> penalized;

    std::size_t size() const noexcept { return columns.size(); }
};

struct DesignMatrix {
    ColumnStats stats;
    Eigen::MatrixXd values;  // rows follow `cells`, column-major storage
    std::vector<CellIndex> cells;
    std::vector<BasisFunction> dropped;  // degenerate on the past cells

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
    const std::vector<bool>& penalized() const noexcept { return stats.penalized; }
};

inline constexpr double kDegenerateColumnSd = 1e-12;

// Evaluates and standardizes the basis on `cells` (population sd); penalized
// columns with sd below kDegenerateColumnSd are dropped.
DesignMatrix assemble(std::span<const BasisFunction> basis, std::span<const CellIndex> cells);

// Evaluates the columns of a previous assembly on new cells with that
// assembly's standardization; never adds or drops columns.
DesignMatrix assemble(const ColumnStats& stats, std::span<const CellIndex> cells);

// Coefficients on the raw covariate scale for a standardized coefficient vector.
Eigen::VectorXd destandardize(const ColumnStats& stats, const Eigen::VectorXd& beta);

// Linear predictor at `cell` from raw-scale coefficients.
double raw_predictor(const ColumnStats& stats, const Eigen::VectorXd& raw_beta,
                     const CellIndex& cell);

// Debug dump: index,label,mean,sd,status.
void write_basis_csv(std::ostream& out, const DesignMatrix& design);

}  // namespace reserve_lasso
