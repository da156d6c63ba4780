#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace reserve_lasso {

// Cell of a claims triangle: accident period i, development period j.
struct CellIndex {
    int i = 1;
    int j = 1;

    // Payment (calendar) period.
    constexpr int t() const noexcept { return i + j - 1; }

    // Row-major order: i, then j.
    auto operator<=>(const CellIndex&) const = default;
};

int payment_period(int i, int j);

// {(i,j): i+j <= I+1} in row-major order.
std::vector<CellIndex> past_cells(int side);

// Future cells i,j <= I with i+j > I+1, in row-major order. No tail beyond
// development period I.
struct ForecastRegion {
    int side = 0;
    std::vector<CellIndex> cells;

    std::size_t size() const noexcept { return cells.size(); }
};

ForecastRegion future_cells(int side);

// Observed incremental payments over the past cells. Immutable; values are
// stored in the canonical order of past_cells(side) and are strictly positive.
class Triangle {
public:
    Triangle(int side, std::vector<double> values);

    static Triangle from_cells(int side, const std::map<CellIndex, double>& cells);

    int side() const noexcept { return side_; }
    std::size_t cell_count() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<CellIndex>& cells() const noexcept { return cells_; }

    double at(int i, int j) const;
    std::size_t index_of(int i, int j) const;

private:
    int side_;
    std::vector<CellIndex> cells_;
    std::vector<double> values_;
};

// Position of (i,j) in past_cells(side); the cell must lie in the past region.
std::size_t past_index(int side, int i, int j);

// Sum of forecasts over the region. Throws InvalidInput if any cell is absent.
double reserve(const ForecastRegion& region, const std::map<CellIndex, double>& forecasts);
double reserve(std::span<const double> cell_forecasts);

// CSV with header `i,j,value`, one row per past cell, any row order.
Triangle read_triangle_csv(std::istream& in);
void write_triangle_csv(std::ostream& out, const Triangle& triangle);

}  // namespace reserve_lasso
