#include "reserve_lasso/forecast.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "reserve_lasso/csv.hpp"
#include "reserve_lasso/error.hpp"

namespace reserve_lasso {

std::string_view aggregate_name(Aggregate which) {
    switch (which) {
        case Aggregate::aq2: return "AQ2";
        case Aggregate::aq5: return "AQ5";
        case Aggregate::aq10: return "AQ10";
        case Aggregate::pq2: return "PQ2";
        case Aggregate::pq5: return "PQ5";
        case Aggregate::pq10: return "PQ10";
    }
    return "?";
}

ForecastTotals ForecastTotals::scaled(double factor) const {
    ForecastTotals out = *this;
    out.reserve *= factor;
    for (auto& a : out.aggregates) a *= factor;
    return out;
}

ForecastTotals summarize_forecast(const ForecastRegion& region, std::span<const double> cells) {
    if (cells.size() != region.size()) throw InvalidInput("summarize_forecast: length mismatch");
    constexpr std::array<int, 3> spans{2, 5, 10};
    ForecastTotals totals;
    const int side = region.side;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const double value = cells[k];
        if (!std::isfinite(value)) totals.delinquent = true;
        totals.reserve += value;
        const auto& cell = region.cells[k];
        for (std::size_t s = 0; s < spans.size(); ++s) {
            if (cell.i > side - spans[s]) totals.aggregates[s] += value;
            if (cell.t() <= side + spans[s]) totals.aggregates[3 + s] += value;
        }
    }
    if (!std::isfinite(totals.reserve)) totals.delinquent = true;
    return totals;
}

ModelForecast extrapolate(int model_id, const Eigen::VectorXd& beta,
                          const DesignMatrix& future_design, const ForecastRegion& region) {
    if (static_cast<std::size_t>(beta.size()) != future_design.cols())
        throw InvalidInput("extrapolate: coefficient length does not match design");
    if (future_design.rows() != region.size())
        throw InvalidInput("extrapolate: design rows do not match region");
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(future_design.values.rows());
    for (Eigen::Index c = 0; c < beta.size(); ++c)
        if (beta[c] != 0.0) eta.noalias() += beta[c] * future_design.values.col(c);

    ModelForecast forecast;
    forecast.model_id = model_id;
    forecast.cell_forecasts.resize(region.size());
    for (std::size_t k = 0; k < region.size(); ++k) {
        const double value = std::exp(eta[static_cast<Eigen::Index>(k)]);
        forecast.cell_forecasts[k] = std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
    }
    forecast.totals = summarize_forecast(region, forecast.cell_forecasts);
    return forecast;
}

void write_forecast_csv(std::ostream& out, const ForecastRegion& region,
                        std::span<const double> cells) {
    if (cells.size() != region.size()) throw InvalidInput("write_forecast_csv: length mismatch");
    CsvWriter csv(out, {"i", "j", "forecast"});
    for (std::size_t k = 0; k < cells.size(); ++k) {
        csv.cell(region.cells[k].i).cell(region.cells[k].j).cell(cells[k]);
        csv.end_row();
    }
}

}  // namespace reserve_lasso
