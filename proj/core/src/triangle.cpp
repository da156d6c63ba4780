#include "reserve_lasso/triangle.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "reserve_lasso/csv.hpp"
#include "reserve_lasso/error.hpp"

namespace reserve_lasso {

int payment_period(int i, int j) {
    if (i < 1 || j < 1) throw InvalidInput("payment_period: ordinals must be >= 1");
    return i + j - 1;
}

std::vector<CellIndex> past_cells(int side) {
    if (side < 1) throw InvalidInput("past_cells: side must be >= 1");
    std::vector<CellIndex> cells;
    cells.reserve(static_cast<std::size_t>(side) * (side + 1) / 2);
    for (int i = 1; i <= side; ++i)
        for (int j = 1; i + j <= side + 1; ++j) cells.push_back({i, j});
    return cells;
}

ForecastRegion future_cells(int side) {
    if (side < 1) throw InvalidInput("future_cells: side must be >= 1");
    ForecastRegion region{side, {}};
    region.cells.reserve(static_cast<std::size_t>(side) * (side - 1) / 2);
    for (int i = 2; i <= side; ++i)
        for (int j = side + 2 - i; j <= side; ++j) region.cells.push_back({i, j});
    return region;
}

std::size_t past_index(int side, int i, int j) {
    if (i < 1 || j < 1 || i + j > side + 1)
        throw InvalidInput("cell (" + std::to_string(i) + "," + std::to_string(j) +
                           ") is outside the past triangle");
    // Rows r < i hold side+1-r cells each.
    const std::size_t before =
        static_cast<std::size_t>(i - 1) * (side + 1) - static_cast<std::size_t>(i - 1) * i / 2;
    return before + static_cast<std::size_t>(j - 1);
}

Triangle::Triangle(int side, std::vector<double> values)
    : side_(side), cells_(past_cells(side)), values_(std::move(values)) {
    if (values_.size() != cells_.size())
        throw InvalidInput("triangle of side " + std::to_string(side) + " needs " +
                           std::to_string(cells_.size()) + " values, got " +
                           std::to_string(values_.size()));
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!(values_[k] > 0.0) || !std::isfinite(values_[k]))
            throw InvalidInput("triangle value at (" + std::to_string(cells_[k].i) + "," +
                               std::to_string(cells_[k].j) + ") must be positive and finite");
    }
}

Triangle Triangle::from_cells(int side, const std::map<CellIndex, double>& cells) {
    const auto expected = past_cells(side);
    if (cells.size() != expected.size())
        throw InvalidInput("triangle has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(expected.size()));
    std::vector<double> values;
    values.reserve(expected.size());
    for (const auto& cell : expected) {
        auto it = cells.find(cell);
        if (it == cells.end())
            throw InvalidInput("triangle is missing cell (" + std::to_string(cell.i) + "," +
                               std::to_string(cell.j) + ")");
        values.push_back(it->second);
    }
    return Triangle(side, std::move(values));
}

double Triangle::at(int i, int j) const { return values_[index_of(i, j)]; }

std::size_t Triangle::index_of(int i, int j) const { return past_index(side_, i, j); }

double reserve(const ForecastRegion& region, const std::map<CellIndex, double>& forecasts) {
    double total = 0.0;
    for (const auto& cell : region.cells) {
        auto it = forecasts.find(cell);
        if (it == forecasts.end())
            throw InvalidInput("incomplete forecast: no value for cell (" + std::to_string(cell.i) +
                               "," + std::to_string(cell.j) + ")");
        total += it->second;
    }
    return total;
}

double reserve(std::span<const double> cell_forecasts) {
    return std::accumulate(cell_forecasts.begin(), cell_forecasts.end(), 0.0);
}

Triangle read_triangle_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("triangle CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "i,j,value") throw InvalidInput("triangle CSV header must be 'i,j,value'");

    std::map<CellIndex, double> cells;
    int side = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw InvalidInput("triangle CSV line " + std::to_string(line_no) +
                               ": expected 3 fields");
        CellIndex cell;
        double value = 0.0;
        try {
            std::size_t used = 0;
            cell.i = std::stoi(fields[0], &used);
            cell.j = std::stoi(fields[1]);
            value = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw InvalidInput("triangle CSV line " + std::to_string(line_no) +
                               ": unparsable field");
        }
        if (cell.i < 1 || cell.j < 1)
            throw InvalidInput("triangle CSV line " + std::to_string(line_no) +
                               ": ordinals must be >= 1");
        if (!cells.emplace(cell, value).second)
            throw InvalidInput("triangle CSV line " + std::to_string(line_no) + ": duplicate cell");
        side = std::max(side, std::max(cell.i, cell.j));
    }
    if (side == 0) throw InvalidInput("triangle CSV has no data rows");
    for (const auto& [cell, value] : cells)
        if (cell.i + cell.j > side + 1)
            throw InvalidInput("triangle CSV contains future cell (" + std::to_string(cell.i) +
                               "," + std::to_string(cell.j) + ")");
    return Triangle::from_cells(side, cells);
}

void write_triangle_csv(std::ostream& out, const Triangle& triangle) {
    CsvWriter csv(out, {"i", "j", "value"});
    const auto values = triangle.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
        csv.cell(triangle.cells()[k].i).cell(triangle.cells()[k].j).cell(values[k]);
        csv.end_row();
    }
}

}  // namespace reserve_lasso
