#include "minsky/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "minsky/errors.hpp"

namespace minsky {

void ModelParams::validate() const {
    if (!(mu < 0.0)) throw ValidationError("mu must be negative");
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    if (!(i_min > 0.0) || !(i_min < i_max)) {
        throw ValidationError("rate bounds must satisfy 0 < i_min < i_max");
    }
}

void SystemState::validate() const {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw ValidationError("state rate must be positive and finite");
    }
    if (loans_fraction < 0.0 || loans_fraction > 1.0) {
        throw ValidationError("loans_fraction outside [0,1]");
    }
    if (ponzi_density < 0.0 || ponzi_density > 1.0) {
        throw ValidationError("ponzi_density outside [0,1]");
    }
    if (n_tot < 0 || n_loans < 0 || n_ponzi < 0 || n_hedge < 0) {
        throw ValidationError("negative firm count");
    }
    if (n_ponzi + n_hedge > n_tot) {
        throw ValidationError("n_ponzi + n_hedge exceeds n_tot");
    }
}

const char* to_string(Regime r) {
    return r == Regime::LoansAccelerator ? "loans" : "crisis";
}

Regime regime_from_string(const std::string& s) {
    if (s == "loans") return Regime::LoansAccelerator;
    if (s == "crisis") return Regime::CrisisAccelerator;
    throw ValidationError("unknown regime '" + s + "' (expected loans|crisis)");
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Convergent: return "convergent";
        case Stability::Marginal: return "marginal";
        case Stability::Divergent: return "divergent";
    }
    return "?";
}

namespace {

// Power-law share with clamp bookkeeping.
double clamped_pow(double base_rate, double bound, double exponent, bool* clamped) {
    const double raw = std::pow(base_rate / bound, exponent);
    if (raw > 1.0) {
        if (clamped) *clamped = true;
        return 1.0;
    }
    if (raw < 0.0) {  // unreachable for positive bases, kept as a guard
        if (clamped) *clamped = true;
        return 0.0;
    }
    return raw;
}

void require_positive_rate(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw ValidationError("rate must be positive and finite");
    }
}

}  // namespace

double loans_fraction(double rate, const ModelParams& p) {
    require_positive_rate(rate);
    p.validate();
    return clamped_pow(rate, p.i_min, p.mu, nullptr);
}

double ponzi_fraction(double rate, const ModelParams& p) {
    require_positive_rate(rate);
    p.validate();
    return clamped_pow(rate, p.i_max, p.beta, nullptr);
}

double rate_from_loans(double fraction, const ModelParams& p) {
    p.validate();
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ValidationError("loans fraction must lie in (0, 1]");
    }
    return p.i_min * std::pow(fraction, p.alpha1);
}

double rate_from_ponzi(double density, const ModelParams& p) {
    p.validate();
    if (!(density > 0.0) || density > 1.0) {
        throw ValidationError("ponzi density must lie in (0, 1]");
    }
    return p.i_max * std::pow(density, p.alpha2);
}

std::int64_t count_from_fraction(double fraction, std::int64_t total) {
    const double scaled = fraction * static_cast<double>(total);
    // std::nearbyint honors the default FE_TONEAREST mode: ties go to even.
    double rounded = std::nearbyint(scaled);
    rounded = std::clamp(rounded, 0.0, static_cast<double>(total));
    return static_cast<std::int64_t>(rounded);
}

SystemState step(const SystemState& s, Regime regime, const ModelParams& p) {
    s.validate();
    p.validate();
    SystemState next = s;
    next.t = s.t + 1;
    next.clamped = false;
    if (regime == Regime::LoansAccelerator) {
        const double f = clamped_pow(s.rate, p.i_min, p.mu, &next.clamped);
        next.loans_fraction = f;
        next.n_loans = count_from_fraction(f, s.n_tot);
        next.rate = rate_from_loans(f, p);
    } else {
        const double rho = clamped_pow(s.rate, p.i_max, p.beta, &next.clamped);
        next.ponzi_density = rho;
        next.n_ponzi = count_from_fraction(rho, s.n_tot);
        // Counts must stay a partition: a firm cannot be hedge and ponzi at once.
        next.n_hedge = std::min(next.n_hedge, next.n_tot - next.n_ponzi);
        next.rate = rate_from_ponzi(rho, p);
    }
    return next;
}

StabilityClass classify_stability(double product, double epsilon) {
    if (epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
    StabilityClass out;
    out.product = product;
    const double mag = std::fabs(product);
    if (mag < 1.0 - epsilon) {
        out.kind = Stability::Convergent;
    } else if (mag > 1.0 + epsilon) {
        out.kind = Stability::Divergent;
    } else {
        out.kind = Stability::Marginal;
    }
    return out;
}

std::vector<SystemState> run_trajectory(const SystemState& initial,
                                        const std::vector<SchedulePeriod>& schedule,
                                        int steps_per_period) {
    if (schedule.empty()) throw ValidationError("schedule must not be empty");
    if (steps_per_period < 0) throw ValidationError("steps_per_period must be >= 0");
    initial.validate();
    std::vector<SystemState> out;
    out.reserve(static_cast<std::size_t>(schedule.size()) * steps_per_period + 1);
    out.push_back(initial);
    for (const auto& period : schedule) {
        for (int k = 0; k < steps_per_period; ++k) {
            out.push_back(step(out.back(), period.regime, period.params));
        }
    }
    return out;
}

}  // namespace minsky
