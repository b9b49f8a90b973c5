#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace minsky {

// Exponents and rate bounds driving both regimes.
//   mu    < 0 : heterogeneity of loan resiliences (upper tail)
//   beta  > 0 : heterogeneity of ponziness (lower tail)
//   alpha1/alpha2 : inter-scale coefficients feeding densities back into the
//                   next-period rate; either sign is accepted
//   0 < i_min < i_max : rate bounds, percent/year
struct ModelParams {
    double mu = 0.0;
    double beta = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double i_min = 0.0;
    double i_max = 0.0;

    void validate() const;  // throws ValidationError on violated invariants
};

enum class Regime { LoansAccelerator, CrisisAccelerator };

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

// One time step (month) of the macro state. Counts are reporting artifacts;
// the dynamics run on the fractions. Invariants: fractions in [0,1], counts
// non-negative, n_ponzi + n_hedge <= n_tot.
struct SystemState {
    int t = 0;
    double rate = 0.0;  // percent/year
    std::int64_t n_tot = 0;
    std::int64_t n_loans = 0;
    std::int64_t n_ponzi = 0;
    std::int64_t n_hedge = 0;
    double loans_fraction = 0.0;
    double ponzi_density = 0.0;
    bool clamped = false;  // set when the last step clamped a fraction into [0,1]

    void validate() const;
};

enum class Stability { Convergent, Marginal, Divergent };

const char* to_string(Stability s);

struct StabilityClass {
    Stability kind = Stability::Marginal;
    double product = 0.0;  // the governing exponent product
};

// Share of firms taking loans at the given rate: clamp((rate/i_min)^mu, 0, 1).
double loans_fraction(double rate, const ModelParams& p);

// Share of firms unable to pay even interest: clamp((rate/i_max)^beta, 0, 1).
double ponzi_fraction(double rate, const ModelParams& p);

// Next-period rate from the current loans share: i_min * fraction^alpha1.
double rate_from_loans(double fraction, const ModelParams& p);

// Next-period rate from the current ponzi density: i_max * density^alpha2.
double rate_from_ponzi(double density, const ModelParams& p);

// One cobweb step. LoansAccelerator: new fraction at the current rate, then the
// new rate from that fraction. CrisisAccelerator: same with the ponzi maps.
// The count matching the updated fraction is refreshed (round half to even).
SystemState step(const SystemState& s, Regime regime, const ModelParams& p);

// Convergent iff |product| < 1 - epsilon; Divergent iff |product| > 1 + epsilon;
// Marginal in the band between.
StabilityClass classify_stability(double product, double epsilon = 0.01);

struct SchedulePeriod {
    std::string label;
    Regime regime = Regime::CrisisAccelerator;
    ModelParams params;
};

// Runs steps_per_period steps for each schedule entry in order. The returned
// trajectory includes the initial state, so its length is
// schedule.size() * steps_per_period + 1. Deterministic.
std::vector<SystemState> run_trajectory(const SystemState& initial,
                                        const std::vector<SchedulePeriod>& schedule,
                                        int steps_per_period = 12);

// Half-to-even rounding of fraction * total, clamped into [0, total].
std::int64_t count_from_fraction(double fraction, std::int64_t total);

}  // namespace minsky
