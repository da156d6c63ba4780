#pragma once

namespace reserve_lasso {

// Polygamma functions for x > 0, by upward recurrence to x >= 10 followed by
// the Bernoulli asymptotic series. Absolute accuracy ~1e-14 for moderate x.
double digamma(double x);
double trigamma(double x);

// ln(x) - digamma(x), evaluated without cancellation for large x.
double log_minus_digamma(double x);

}  // namespace reserve_lasso
