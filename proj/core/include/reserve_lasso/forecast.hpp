#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "reserve_lasso/basis.hpp"
#include "reserve_lasso/triangle.hpp"

namespace reserve_lasso {

// Forecast aggregates compared by the inclusion gates. AQn is the total future
// forecast of the n most recent accident periods; PQn is the total over the
// next n payment periods t = I+1..I+n.
enum class Aggregate : std::size_t { aq2, aq5, aq10, pq2, pq5, pq10 };
inline constexpr std::size_t kAggregateCount = 6;
inline constexpr std::array<Aggregate, kAggregateCount> kAllAggregates{
    Aggregate::aq2, Aggregate::aq5, Aggregate::aq10, Aggregate::pq2, Aggregate::pq5, Aggregate::pq10};

std::string_view aggregate_name(Aggregate which);

struct ForecastTotals {
    double reserve = 0.0;
    std::array<double, kAggregateCount> aggregates{};
    bool delinquent = false;  // non-finite extrapolation

    double operator[](Aggregate which) const { return aggregates[static_cast<std::size_t>(which)]; }
    ForecastTotals scaled(double factor) const;
};

struct ModelForecast {
    int model_id = 0;
    std::vector<double> cell_forecasts;  // aligned with ForecastRegion::cells
    ForecastTotals totals;
};

ForecastTotals summarize_forecast(const ForecastRegion& region, std::span<const double> cells);

// exp(row * beta) on every future cell; `future_design` must be assembled with
// the past standardization (assemble(past.stats, region.cells)).
ModelForecast extrapolate(int model_id, const Eigen::VectorXd& beta,
                          const DesignMatrix& future_design, const ForecastRegion& region);

// i,j,forecast for every future cell.
void write_forecast_csv(std::ostream& out, const ForecastRegion& region,
                        std::span<const double> cells);

}  // namespace reserve_lasso
