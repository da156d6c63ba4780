#include "reserve_lasso/special_functions.hpp"

#include <cmath>

#include "reserve_lasso/error.hpp"

namespace reserve_lasso {
namespace {

constexpr double kAsymptoticStart = 10.0;

// ln(x) - digamma(x) for x >= kAsymptoticStart.
double log_minus_digamma_tail(double x) {
    const double r = 1.0 / x;
    const double r2 = r * r;
    const double series =
        r2 * (1.0 / 12 -
              r2 * (1.0 / 120 -
                    r2 * (1.0 / 252 -
                          r2 * (1.0 / 240 - r2 * (1.0 / 132 - r2 * (691.0 / 32760 - r2 / 12))))));
    return 0.5 * r + series;
}

void require_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw InvalidInput(std::string(name) + ": argument must be positive and finite");
}

}  // namespace

double log_minus_digamma(double x) {
    require_positive(x, "log_minus_digamma");
    if (x >= kAsymptoticStart) return log_minus_digamma_tail(x);
    double shift_sum = 0.0;
    double z = x;
    while (z < kAsymptoticStart) {
        shift_sum += 1.0 / z;
        z += 1.0;
    }
    return std::log(x / z) + log_minus_digamma_tail(z) + shift_sum;
}

double digamma(double x) {
    require_positive(x, "digamma");
    double shift_sum = 0.0;
    double z = x;
    while (z < kAsymptoticStart) {
        shift_sum += 1.0 / z;
        z += 1.0;
    }
    return std::log(z) - log_minus_digamma_tail(z) - shift_sum;
}

double trigamma(double x) {
    require_positive(x, "trigamma");
    double shift_sum = 0.0;
    double z = x;
    while (z < kAsymptoticStart) {
        shift_sum += 1.0 / (z * z);
        z += 1.0;
    }
    const double r = 1.0 / z;
    const double r2 = r * r;
    const double series =
        r + r2 / 2 +
        r * r2 *
            (1.0 / 6 -
             r2 * (1.0 / 30 -
                   r2 * (1.0 / 42 - r2 * (1.0 / 30 - r2 * (5.0 / 66 - r2 * (691.0 / 2730 -
                                                                          r2 * 7.0 / 6))))));
    return series + shift_sum;
}

}  // namespace reserve_lasso
