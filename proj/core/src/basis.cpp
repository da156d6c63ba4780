#include "reserve_lasso/basis.hpp"

#include <cmath>
#include <ostream>

#include "reserve_lasso/csv.hpp"
#include "reserve_lasso/error.hpp"

namespace reserve_lasso {

double ramp(double x, double knot) { return std::max(0.0, x - knot); }

double heaviside(double x, double threshold) { return x >= threshold ? 1.0 : 0.0; }

double BasisFunction::evaluate(const CellIndex& cell) const {
    const double i = cell.i, j = cell.j, t = cell.t();
    switch (kind) {
        case BasisKind::intercept: return 1.0;
        case BasisKind::ramp_i: return ramp(i, first_knot);
        case BasisKind::ramp_j: return ramp(j, first_knot);
        case BasisKind::ramp_t: return ramp(t, first_knot);
        case BasisKind::hs_ij: return heaviside(i, first_knot) * heaviside(j, second_knot);
        case BasisKind::hs_it: return heaviside(i, first_knot) * heaviside(t, second_knot);
        case BasisKind::hs_tj: return heaviside(t, first_knot) * heaviside(j, second_knot);
    }
    return 0.0;
}

std::string BasisFunction::label() const {
    const auto a = std::to_string(first_knot), b = std::to_string(second_knot);
    switch (kind) {
        case BasisKind::intercept: return "intercept";
        case BasisKind::ramp_i: return "R" + a + "(i)";
        case BasisKind::ramp_j: return "R" + a + "(j)";
        case BasisKind::ramp_t: return "R" + a + "(t)";
        case BasisKind::hs_ij: return "H" + a + "(i)H" + b + "(j)";
        case BasisKind::hs_it: return "H" + a + "(i)H" + b + "(t)";
        case BasisKind::hs_tj: return "H" + a + "(t)H" + b + "(j)";
    }
    return "?";
}

std::vector<BasisFunction> build_basis(int side) {
    if (side < 2) throw InvalidInput("build_basis: side must be >= 2");
    std::vector<BasisFunction> basis;
    basis.reserve(1 + 3 * side + 3 * (side - 1) * (side - 1));
    basis.push_back({BasisKind::intercept, 0, 0});
    for (auto kind : {BasisKind::ramp_i, BasisKind::ramp_j, BasisKind::ramp_t})
        for (int knot = 0; knot < side; ++knot) basis.push_back({kind, knot, 0});
    for (auto kind : {BasisKind::hs_ij, BasisKind::hs_it, BasisKind::hs_tj})
        for (int a = 2; a <= side; ++a)
            for (int b = 2; b <= side; ++b) basis.push_back({kind, a, b});
    return basis;
}

DesignMatrix assemble(std::span<const BasisFunction> basis, std::span<const CellIndex> cells) {
    if (cells.empty()) throw InvalidInput("assemble: empty cell set");
    if (basis.empty() || basis.front().kind != BasisKind::intercept)
        throw InvalidInput("assemble: basis must start with the intercept");

    const auto n = static_cast<Eigen::Index>(cells.size());
    DesignMatrix design;
    design.cells.assign(cells.begin(), cells.end());

    std::vector<Eigen::VectorXd> kept;
    kept.reserve(basis.size());
    Eigen::VectorXd column(n);
    for (const auto& fn : basis) {
        for (Eigen::Index r = 0; r < n; ++r) column[r] = fn.evaluate(cells[r]);
        if (fn.kind == BasisKind::intercept) {
            design.stats.columns.push_back(fn);
            design.stats.means.push_back(0.0);
            design.stats.sds.push_back(1.0);
            design.stats.penalized.push_back(false);
            kept.push_back(column);
            continue;
        }
        const double mean = column.mean();
        const double sd = std::sqrt((column.array() - mean).square().mean());
        if (!(sd >= kDegenerateColumnSd)) {
            design.dropped.push_back(fn);
            continue;
        }
        design.stats.columns.push_back(fn);
        design.stats.means.push_back(mean);
        design.stats.sds.push_back(sd);
        design.stats.penalized.push_back(true);
        kept.push_back((column.array() - mean) / sd);
    }

    design.values.resize(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c)
        design.values.col(static_cast<Eigen::Index>(c)) = kept[c];
    return design;
}

DesignMatrix assemble(const ColumnStats& stats, std::span<const CellIndex> cells) {
    if (cells.empty()) throw InvalidInput("assemble: empty cell set");
    const auto n = static_cast<Eigen::Index>(cells.size());
    DesignMatrix design;
    design.stats = stats;
    design.cells.assign(cells.begin(), cells.end());
    design.values.resize(n, static_cast<Eigen::Index>(stats.size()));
    for (std::size_t c = 0; c < stats.size(); ++c) {
        const auto& fn = stats.columns[c];
        for (Eigen::Index r = 0; r < n; ++r)
            design.values(r, static_cast<Eigen::Index>(c)) =
                (fn.evaluate(cells[r]) - stats.means[c]) / stats.sds[c];
    }
    return design;
}

Eigen::VectorXd destandardize(const ColumnStats& stats, const Eigen::VectorXd& beta) {
    if (static_cast<std::size_t>(beta.size()) != stats.size())
        throw InvalidInput("destandardize: coefficient length mismatch");
    Eigen::VectorXd raw = beta;
    for (std::size_t c = 1; c < stats.size(); ++c) {
        raw[c] = beta[c] / stats.sds[c];
        raw[0] -= raw[c] * stats.means[c];
    }
    return raw;
}

double raw_predictor(const ColumnStats& stats, const Eigen::VectorXd& raw_beta,
                     const CellIndex& cell) {
    double eta = 0.0;
    for (std::size_t c = 0; c < stats.size(); ++c)
        if (raw_beta[c] != 0.0) eta += raw_beta[c] * stats.columns[c].evaluate(cell);
    return eta;
}

void write_basis_csv(std::ostream& out, const DesignMatrix& design) {
    CsvWriter csv(out, {"index", "label", "mean", "sd", "status"});
    for (std::size_t c = 0; c < design.stats.size(); ++c) {
        csv.cell(c).cell(design.stats.columns[c].label()).cell(design.stats.means[c]);
        csv.cell(design.stats.sds[c]).cell(std::string_view("kept"));
        csv.end_row();
    }
    for (const auto& fn : design.dropped) {
        csv.cell(std::string_view("-")).cell(fn.label()).cell(std::string_view("-"));
        csv.cell(std::string_view("0")).cell(std::string_view("dropped"));
        csv.end_row();
    }
}

}  // namespace reserve_lasso
