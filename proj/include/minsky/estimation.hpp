#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "minsky/dynamics.hpp"
#include "minsky/firm.hpp"

namespace minsky {

// Result of a log-log OLS fit. bound_rate is never derived from the intercept;
// calibrate_bound assigns it against an observed rate series.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;               // log space
    std::optional<double> bound_rate;     // percent/year, set by calibration
    double r_squared = 0.0;
    int n_points = 0;
    double cutoff = 0.0;                  // log-space window threshold used
    int n_excluded = 0;                   // records dropped before the CDF
};

// One observation of the bank rate. period is an ordering key: either a plain
// year (2003) or year*100 + month (200301).
struct RateObs {
    int period = 0;
    double rate = 0.0;  // percent/year
};

using RateSeries = std::vector<RateObs>;

int year_of_period(int period);

enum class Tail { Upper, Lower };

struct CdfPoint {
    double x = 0.0;
    double p = 0.0;
};

// Empirical cumulative distribution at each distinct sorted value.
// Upper: p(x) = #{v > x}/n. Lower: p(x) = #{v < x}/n.
// Points with p = 0 are dropped so every retained point survives a log transform.
std::vector<CdfPoint> empirical_cdf(const std::vector<double>& values, Tail tail);

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y);

// Zero-intercept least squares: slope of y on x through the origin.
double ols_through_origin(const std::vector<double>& x, const std::vector<double>& y);

// Upper-tail exponent of EBIT/bank_loans: OLS of ln P[X > x] on ln x over the
// window ln x > -1.5. Records need ebit > 0 and bank_loans > 0; the rest are
// excluded and counted. Slope is expected negative.
FitResult fit_mu(const std::vector<FirmRecord>& records);

// Lower-tail exponent of EBTDA/financial_costs: OLS of ln P[X < x] on ln x over
// the window ln x < 3. Records need ebtda > 0 and financial_costs > 0.
// Slope is expected positive.
FitResult fit_beta(const std::vector<FirmRecord>& records);

// Finds the rate bound b minimizing sum((b * d_t^alpha - i_t)^2) jointly over
// (b, alpha) by alternating golden-section line searches (tolerance 1e-9,
// at most 200 sweeps). regime only tags which bound the result stands for.
double calibrate_bound(const FitResult& fit, const RateSeries& observed,
                       const std::vector<double>& densities, Regime regime);

// Per-period inter-scale coefficient alpha = ln(i_t / bound) / ln(f_{t-1}).
// fractions[k] is the prior-period density paired with observed[k].
// With yearly = true, observations sharing a year collapse into one
// zero-intercept least-squares slope per year.
std::vector<std::pair<int, double>> calibrate_alpha(const RateSeries& observed,
                                                    const std::vector<double>& fractions,
                                                    double bound, bool yearly);

}  // namespace minsky
