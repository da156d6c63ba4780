#pragma once

#include <array>
#include <iosfwd>

#include "reserve_lasso/forecast.hpp"

namespace reserve_lasso {

struct Gate {
    Aggregate aggregate = Aggregate::aq2;
    double lower = 1.0;  // ratio to the primary forecast, inclusive
    double upper = 1.0;
};

struct GateSet {
    std::array<Gate, kAggregateCount> gates;

    // Throws InvalidInput unless 0 < lower <= 1 <= upper for every gate.
    void validate() const;
    const Gate& operator[](Aggregate which) const { return gates[static_cast<std::size_t>(which)]; }
};

// Inclusion gates for delinquent-model censoring.
GateSet default_gates();

// Upper limits times `factor`, lower limits divided by it, both rounded to two
// decimals.
GateSet widen(const GateSet& gates, double factor);

struct GateResult {
    bool pass = false;
    std::array<double, kAggregateCount> ratios{};
    std::array<bool, kAggregateCount> passed{};
};

// Candidate passes iff every aggregate ratio candidate/primary lies within its
// gate. Bounds are inclusive up to a relative 1e-12. A delinquent candidate, or
// a primary aggregate of zero, fails the affected gates.
GateResult gate_check(const ForecastTotals& candidate, const ForecastTotals& primary,
                      const GateSet& gates);

// Gates file: CSV `aggregate,lower,upper` with one row per aggregate.
GateSet read_gates_csv(std::istream& in);
void write_gates_csv(std::ostream& out, const GateSet& gates);

}  // namespace reserve_lasso
