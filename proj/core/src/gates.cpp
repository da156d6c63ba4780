#include "reserve_lasso/gates.hpp"

#include <cmath>
#include <limits>
#include <istream>
#include <ostream>
#include <string>

#include "reserve_lasso/csv.hpp"
#include "reserve_lasso/error.hpp"

namespace reserve_lasso {
namespace {

constexpr double kBoundSlack = 1e-12;

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

void GateSet::validate() const {
    for (std::size_t k = 0; k < gates.size(); ++k) {
        const auto& g = gates[k];
        if (g.aggregate != kAllAggregates[k]) throw InvalidInput("gate set: aggregates out of order");
        if (!(g.lower > 0.0 && g.lower <= 1.0 && g.upper >= 1.0) || !std::isfinite(g.upper))
            throw InvalidInput("gate " + std::string(aggregate_name(g.aggregate)) +
                               ": need 0 < lower <= 1 <= upper");
    }
}

GateSet default_gates() {
    return GateSet{{{{Aggregate::aq2, 0.75, 1.33},
                     {Aggregate::aq5, 0.80, 1.25},
                     {Aggregate::aq10, 0.83, 1.20},
                     {Aggregate::pq2, 0.91, 1.10},
                     {Aggregate::pq5, 0.87, 1.15},
                     {Aggregate::pq10, 0.83, 1.20}}}};
}

GateSet widen(const GateSet& gates, double factor) {
    if (!(factor >= 1.0)) throw InvalidInput("widen: factor must be >= 1");
    GateSet out = gates;
    for (auto& g : out.gates) {
        g.lower = round2(g.lower / factor);
        g.upper = round2(g.upper * factor);
    }
    return out;
}

GateResult gate_check(const ForecastTotals& candidate, const ForecastTotals& primary,
                      const GateSet& gates) {
    GateResult result;
    result.pass = true;
    for (std::size_t k = 0; k < kAggregateCount; ++k) {
        const double base = primary.aggregates[k];
        const auto& gate = gates.gates[k];
        bool ok = false;
        double ratio = std::numeric_limits<double>::quiet_NaN();
        if (base > 0.0 && !candidate.delinquent) {
            ratio = candidate.aggregates[k] / base;
            ok = ratio >= gate.lower * (1.0 - kBoundSlack) && ratio <= gate.upper * (1.0 + kBoundSlack);
        }
        result.ratios[k] = ratio;
        result.passed[k] = ok;
        result.pass = result.pass && ok;
    }
    return result;
}

GateSet read_gates_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("gates CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "aggregate,lower,upper") throw InvalidInput("gates CSV header must be 'aggregate,lower,upper'");
    GateSet gates = default_gates();
    std::array<bool, kAggregateCount> seen{};
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) throw InvalidInput("gates CSV: expected 3 fields per row");
        std::size_t k = 0;
        while (k < kAggregateCount && aggregate_name(kAllAggregates[k]) != fields[0]) ++k;
        if (k == kAggregateCount) throw InvalidInput("gates CSV: unknown aggregate '" + fields[0] + "'");
        if (seen[k]) throw InvalidInput("gates CSV: duplicate aggregate '" + fields[0] + "'");
        seen[k] = true;
        try {
            gates.gates[k].lower = std::stod(fields[1]);
            gates.gates[k].upper = std::stod(fields[2]);
        } catch (const std::exception&) {
            throw InvalidInput("gates CSV: unparsable limit for '" + fields[0] + "'");
        }
    }
    for (std::size_t k = 0; k < kAggregateCount; ++k)
        if (!seen[k])
            throw InvalidInput("gates CSV: missing aggregate " +
                               std::string(aggregate_name(kAllAggregates[k])));
    gates.validate();
    return gates;
}

void write_gates_csv(std::ostream& out, const GateSet& gates) {
    CsvWriter csv(out, {"aggregate", "lower", "upper"});
    for (const auto& g : gates.gates) {
        csv.cell(aggregate_name(g.aggregate)).cell(g.lower).cell(g.upper);
        csv.end_row();
    }
}

}  // namespace reserve_lasso
