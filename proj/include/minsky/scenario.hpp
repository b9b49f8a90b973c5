#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minsky/dynamics.hpp"
#include "minsky/estimation.hpp"
#include "minsky/firm.hpp"

namespace minsky {

// One row of yearly population counts.
struct PopulationUpdate {
    int year = 0;
    std::int64_t n_tot = 0;
    std::int64_t n_hedge = 0;
    std::int64_t n_ponzi = 0;

    double ponzi_density() const;
    double hedge_density() const;
};

// Where a period's parameters come from: given verbatim, or fitted from a
// firm-record dataset (plus optional rate series for the alpha calibration).
struct PeriodSpec {
    std::string label;
    Regime regime = Regime::CrisisAccelerator;
    int steps = 12;
    bool fit_from_data = false;
    ModelParams params;            // used when fit_from_data == false
    std::string firms_csv;         // fit inputs
    std::string rates_csv;
    std::optional<int> fit_year;   // restrict the fit to this year's records
    std::optional<double> i_min;   // fixed bounds for fitted periods
    std::optional<double> i_max;
    std::optional<std::int64_t> n_tot;  // exogenous population update
};

struct ScenarioConfig {
    std::vector<PeriodSpec> periods;
    SystemState initial_state;
    std::uint64_t seed = 0;
    double stability_epsilon = 0.01;

    void validate() const;
};

struct PeriodReport {
    std::string label;
    Regime regime = Regime::CrisisAccelerator;
    ModelParams params;
    double product_loans = 0.0;   // |alpha1 * mu|, the loans cobweb slope
    double product_crisis = 0.0;  // |alpha2 * beta|, the crisis cobweb slope
    StabilityClass stability;     // of the active regime's product
    SystemState end_state;
    std::vector<SystemState> trajectory;  // includes the period's start state
};

struct ScenarioReport {
    std::vector<PeriodReport> periods;
    std::vector<SystemState> trajectory;  // stitched, initial state included once
};

// Parses the JSON config documented in the README.
ScenarioConfig load_scenario_config(const std::string& path);

// Runs every period in order, each one consuming the previous end state.
// Reports both exponent products per period and the stability class of the
// active regime. Deterministic given the config.
ScenarioReport run_scenario(const ScenarioConfig& config);

// Synthetic firm population whose EBIT/BL upper tail follows exponent mu, whose
// EBTDA/FC lower tail follows exponent beta, and whose classified ponzi share
// approximates (rate/i_max)^beta. The two ratios are coupled so that a firm too
// weak to pay interest is never strong enough to repay principal.
std::vector<FirmRecord> generate_synthetic_population(std::int64_t n, double mu,
                                                      double beta, double rate,
                                                      const ModelParams& params,
                                                      std::uint64_t seed, int year = 0);

}  // namespace minsky
