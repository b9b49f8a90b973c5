#include "minsky/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "minsky/errors.hpp"

namespace minsky {

int year_of_period(int period) {
    // Six-digit periods encode year*100 + month; anything shorter is a year.
    return period >= 100000 ? period / 100 : period;
}

std::vector<CdfPoint> empirical_cdf(const std::vector<double>& values, Tail tail) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values) {
        if (!std::isfinite(x) || x <= 0.0) {
            throw ValidationError("empirical_cdf requires finite positive values");
        }
        v.push_back(x);
    }
    if (v.size() < 3) throw ValidationError("empirical_cdf needs at least 3 values");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    std::vector<CdfPoint> out;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
        double p;
        if (tail == Tail::Upper) {
            p = (n - static_cast<double>(j + 1)) / n;  // strictly greater
        } else {
            p = static_cast<double>(i) / n;  // strictly less
        }
        if (p > 0.0) out.push_back({v[i], p});
        i = j + 1;
    }
    return out;
}

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("ols: length mismatch");
    if (x.size() < 2) throw ValidationError("ols: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xm;
        const double dy = y[i] - ym;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw ValidationError("ols: regressor has zero variance");
    OlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    if (syy == 0.0) {
        fit.r_squared = 1.0;  // flat response fitted exactly
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (fit.intercept + fit.slope * x[i]);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

double ols_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) {
        throw ValidationError("ols_through_origin: bad lengths");
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (sxx == 0.0) throw ValidationError("ols_through_origin: zero regressor");
    return sxy / sxx;
}

namespace {

struct RatioExtraction {
    std::vector<double> ratios;
    int n_excluded = 0;
};

RatioExtraction extract_ratios(const std::vector<FirmRecord>& records,
                               const std::optional<double> FirmRecord::*num,
                               const std::optional<double> FirmRecord::*den) {
    RatioExtraction out;
    out.ratios.reserve(records.size());
    for (const auto& r : records) {
        const auto& a = r.*num;
        const auto& b = r.*den;
        if (!a || !b || !(*a > 0.0) || !(*b > 0.0)) {
            ++out.n_excluded;
            continue;
        }
        const double ratio = *a / *b;
        if (!std::isfinite(ratio) || ratio <= 0.0) {
            ++out.n_excluded;
            continue;
        }
        out.ratios.push_back(ratio);
    }
    return out;
}

FitResult fit_tail(const std::vector<FirmRecord>& records,
                   const std::optional<double> FirmRecord::*num,
                   const std::optional<double> FirmRecord::*den, Tail tail,
                   double log_cutoff) {
    const RatioExtraction ex = extract_ratios(records, num, den);
    if (ex.ratios.size() < 3) {
        throw ValidationError("tail fit: fewer than 3 usable ratios");
    }
    const auto cdf = empirical_cdf(ex.ratios, tail);
    std::vector<double> lx, lp;
    lx.reserve(cdf.size());
    lp.reserve(cdf.size());
    for (const auto& pt : cdf) {
        const double l = std::log(pt.x);
        const bool in_window =
            tail == Tail::Upper ? (l > log_cutoff) : (l < log_cutoff);
        if (!in_window) continue;
        lx.push_back(l);
        lp.push_back(std::log(pt.p));
    }
    if (lx.size() < 3) {
        throw ValidationError("tail fit: fewer than 3 points inside the fit window");
    }
    const OlsFit f = ols(lx, lp);
    FitResult out;
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.r_squared = f.r_squared;
    out.n_points = static_cast<int>(lx.size());
    out.cutoff = log_cutoff;
    out.n_excluded = ex.n_excluded;
    return out;
}

// Golden-section line search on a bracket known to contain a minimum.
double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double tol) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

// Expands the interval around x0 until f has an interior minimum, then refines.
double line_minimize(const std::function<double(double)>& f, double x0, double h,
                     double tol) {
    double lo = x0 - h, hi = x0 + h;
    for (int i = 0; i < 60; ++i) {
        const double mid = (lo + hi) / 2.0;
        if (f(mid) <= f(lo) && f(mid) <= f(hi)) break;
        if (f(lo) < f(hi)) {
            lo -= (hi - lo);
        } else {
            hi += (hi - lo);
        }
    }
    return golden_section(f, lo, hi, tol);
}

}  // namespace

FitResult fit_mu(const std::vector<FirmRecord>& records) {
    return fit_tail(records, &FirmRecord::ebit, &FirmRecord::bank_loans, Tail::Upper,
                    -1.5);
}

FitResult fit_beta(const std::vector<FirmRecord>& records) {
    return fit_tail(records, &FirmRecord::ebtda, &FirmRecord::financial_costs,
                    Tail::Lower, 3.0);
}

double calibrate_bound(const FitResult& fit, const RateSeries& observed,
                       const std::vector<double>& densities, Regime regime) {
    (void)fit;  // the tail fit supplies context; the bound search is self-seeding
    if (observed.size() != densities.size()) {
        throw ValidationError("calibrate_bound: series and densities differ in length");
    }
    if (observed.size() < 2) {
        throw ValidationError("calibrate_bound: under-determined, need >= 2 observations");
    }
    std::vector<double> ld, li;
    ld.reserve(densities.size());
    li.reserve(densities.size());
    for (std::size_t k = 0; k < densities.size(); ++k) {
        const double d = densities[k];
        const double i = observed[k].rate;
        if (!(d > 0.0) || !(d < 1.0)) {
            throw ValidationError("calibrate_bound: densities must lie strictly in (0,1)");
        }
        if (!(i > 0.0)) throw ValidationError("calibrate_bound: rates must be positive");
        ld.push_back(std::log(d));
        li.push_back(std::log(i));
    }
    const double spread =
        *std::max_element(ld.begin(), ld.end()) - *std::min_element(ld.begin(), ld.end());
    if (spread < 1e-12) {
        throw ValidationError(
            "calibrate_bound: under-determined, densities are all equal");
    }

    // The search runs on the centered model B * (d/d_gm)^a, d_gm the geometric
    // mean density: there the two directions are nearly independent, so the
    // alternating scheme contracts in a few sweeps instead of zigzagging along
    // the correlated (bound, alpha) valley. b = B / d_gm^a recovers the bound.
    const double mean_ld =
        std::accumulate(ld.begin(), ld.end(), 0.0) / static_cast<double>(ld.size());

    // Log-space OLS seeds the search close to the optimum of the rate-space
    // objective; the alternating refinement then works on the true objective.
    const OlsFit seed = ols(ld, li);
    double alpha = seed.slope;
    double scale = std::exp(seed.intercept + seed.slope * mean_ld);

    const auto objective = [&](double b_centered, double a) {
        double s = 0.0;
        for (std::size_t k = 0; k < densities.size(); ++k) {
            const double r =
                b_centered * std::exp(a * (ld[k] - mean_ld)) - observed[k].rate;
            s += r * r;
        }
        return s;
    };

    const double tol = 1e-9;
    bool converged = false;
    for (int sweep = 0; sweep < 200; ++sweep) {
        const double b_prev = scale, a_prev = alpha;
        scale = line_minimize([&](double b) { return objective(b, alpha); }, scale,
                              std::max(1e-3, std::fabs(scale) * 0.5), tol);
        alpha = line_minimize([&](double a) { return objective(scale, a); }, alpha,
                              0.5, tol);
        if (std::fabs(scale - b_prev) < tol && std::fabs(alpha - a_prev) < tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericError(std::string("calibrate_bound: no convergence for the ") +
                           to_string(regime) + " bound after 200 sweeps");
    }
    return scale * std::exp(-alpha * mean_ld);
}

std::vector<std::pair<int, double>> calibrate_alpha(const RateSeries& observed,
                                                    const std::vector<double>& fractions,
                                                    double bound, bool yearly) {
    if (observed.size() != fractions.size()) {
        throw ValidationError("calibrate_alpha: series and fractions differ in length");
    }
    if (observed.empty()) throw ValidationError("calibrate_alpha: empty series");
    if (!(bound > 0.0)) throw ValidationError("calibrate_alpha: bound must be positive");
    std::vector<double> lf, li;
    lf.reserve(fractions.size());
    li.reserve(fractions.size());
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        const double f = fractions[k];
        if (f == 1.0) {
            throw NumericError("calibrate_alpha: fraction 1 makes alpha undefined");
        }
        if (!(f > 0.0) || f > 1.0) {
            throw ValidationError("calibrate_alpha: fractions must lie in (0,1)");
        }
        if (!(observed[k].rate > 0.0)) {
            throw ValidationError("calibrate_alpha: rates must be positive");
        }
        lf.push_back(std::log(f));
        li.push_back(std::log(observed[k].rate / bound));
    }
    std::vector<std::pair<int, double>> out;
    if (!yearly) {
        out.reserve(observed.size());
        for (std::size_t k = 0; k < observed.size(); ++k) {
            out.emplace_back(observed[k].period, li[k] / lf[k]);
        }
        return out;
    }
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_year;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        auto& bucket = by_year[year_of_period(observed[k].period)];
        bucket.first.push_back(lf[k]);
        bucket.second.push_back(li[k]);
    }
    out.reserve(by_year.size());
    for (const auto& [year, data] : by_year) {
        out.emplace_back(year, ols_through_origin(data.first, data.second));
    }
    return out;
}

}  // namespace minsky
