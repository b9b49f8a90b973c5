#include "minsky/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "minsky/errors.hpp"
#include "minsky/io.hpp"
#include "minsky/rng.hpp"
#include "json.hpp"

namespace minsky {

namespace {

using nlohmann::json;

// Every error raised while handling one period gets the period label prefixed,
// preserving the error type so exit codes survive.
template <typename Fn>
auto with_period_context(const std::string& label, Fn&& fn) {
    try {
        return fn();
    } catch (const NumericError& e) {
        throw NumericError("period '" + label + "': " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError("period '" + label + "': " + e.what());
    }
}

double mean_alpha(const std::vector<std::pair<int, double>>& alphas) {
    double sum = 0.0;
    for (const auto& [period, a] : alphas) sum += a;
    return sum / static_cast<double>(alphas.size());
}

// Densities backing the alpha calibration of a fitted period: the classified
// hedge share stands in for the loans-taking share, the classified ponzi share
// for the crisis density. Records that cannot be classified are skipped.
struct ClassifiedShares {
    double hedge = 0.0;
    double ponzi = 0.0;
};

ClassifiedShares classified_shares(const std::vector<FirmRecord>& records) {
    std::int64_t n = 0, n_hedge = 0, n_ponzi = 0;
    for (const auto& r : records) {
        MinskyStatus status;
        try {
            status = classify(r);
        } catch (const MissingFieldError&) {
            continue;
        }
        ++n;
        if (status == MinskyStatus::Hedge) ++n_hedge;
        if (status == MinskyStatus::Ponzi) ++n_ponzi;
    }
    if (n == 0) throw ValidationError("no classifiable records for the fit");
    return {static_cast<double>(n_hedge) / static_cast<double>(n),
            static_cast<double>(n_ponzi) / static_cast<double>(n)};
}

ModelParams fitted_params(const PeriodSpec& spec) {
    if (spec.firms_csv.empty()) {
        throw ValidationError("fitted period needs a firm dataset");
    }
    if (spec.rates_csv.empty()) {
        throw ValidationError(
            "fitted period needs a rate series for the alpha calibration");
    }
    if (!spec.i_min || !spec.i_max) {
        throw ValidationError("fitted period needs explicit rate bounds");
    }
    const auto dataset = io::read_firm_csv(spec.firms_csv);
    const auto records =
        spec.fit_year ? dataset.for_year(*spec.fit_year) : dataset.records;
    if (records.empty()) throw ValidationError("no records to fit");

    ModelParams params;
    params.mu = fit_mu(records).slope;
    params.beta = fit_beta(records).slope;
    params.i_min = *spec.i_min;
    params.i_max = *spec.i_max;

    auto rates = io::read_rate_csv(spec.rates_csv);
    if (spec.fit_year) {
        std::erase_if(rates, [&](const RateObs& obs) {
            return year_of_period(obs.period) != *spec.fit_year;
        });
    }
    if (rates.empty()) throw ValidationError("no rate observations to calibrate");

    const auto shares = classified_shares(records);
    const std::vector<double> hedge_density(rates.size(), shares.hedge);
    const std::vector<double> ponzi_density(rates.size(), shares.ponzi);
    params.alpha1 =
        mean_alpha(calibrate_alpha(rates, hedge_density, params.i_min, false));
    params.alpha2 =
        mean_alpha(calibrate_alpha(rates, ponzi_density, params.i_max, false));
    params.validate();
    return params;
}

// Exogenous population update between periods. The fractions carry over; the
// counts are refreshed to match the new total.
SystemState with_population(const SystemState& s, std::int64_t n_tot) {
    if (n_tot < 0) throw ValidationError("n_tot update must be non-negative");
    SystemState next = s;
    const double hedge_share =
        s.n_tot > 0 ? static_cast<double>(s.n_hedge) / static_cast<double>(s.n_tot)
                    : 0.0;
    next.n_tot = n_tot;
    next.n_loans = count_from_fraction(s.loans_fraction, n_tot);
    next.n_ponzi = count_from_fraction(s.ponzi_density, n_tot);
    next.n_hedge =
        std::min(count_from_fraction(hedge_share, n_tot), n_tot - next.n_ponzi);
    next.validate();
    return next;
}

SystemState state_from_json(const json& j) {
    SystemState s;
    s.t = j.value("t", 0);
    s.rate = j.at("rate").get<double>();
    s.n_tot = j.value("n_tot", std::int64_t{0});
    s.n_loans = j.value("n_loans", std::int64_t{0});
    s.n_ponzi = j.value("n_ponzi", std::int64_t{0});
    s.n_hedge = j.value("n_hedge", std::int64_t{0});
    s.loans_fraction = j.value("loans_fraction", 0.0);
    s.ponzi_density = j.value("ponzi_density", 0.0);
    s.clamped = j.value("clamped", false);
    return s;
}

ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.mu = j.at("mu").get<double>();
    p.beta = j.at("beta").get<double>();
    p.alpha1 = j.at("alpha1").get<double>();
    p.alpha2 = j.at("alpha2").get<double>();
    p.i_min = j.at("i_min").get<double>();
    p.i_max = j.at("i_max").get<double>();
    return p;
}

}  // namespace

double PopulationUpdate::ponzi_density() const {
    return n_tot > 0 ? static_cast<double>(n_ponzi) / static_cast<double>(n_tot)
                     : 0.0;
}

double PopulationUpdate::hedge_density() const {
    return n_tot > 0 ? static_cast<double>(n_hedge) / static_cast<double>(n_tot)
                     : 0.0;
}

void ScenarioConfig::validate() const {
    if (periods.empty()) throw ValidationError("scenario needs at least one period");
    if (!(stability_epsilon >= 0.0) || stability_epsilon >= 1.0) {
        throw ValidationError("stability_epsilon must lie in [0, 1)");
    }
    initial_state.validate();
    for (const auto& p : periods) {
        with_period_context(p.label, [&] {
            if (p.label.empty()) throw ValidationError("period label must be non-empty");
            if (p.steps < 0) throw ValidationError("steps must be non-negative");
            if (!p.fit_from_data) p.params.validate();
            return 0;
        });
    }
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("'" + path + "': " + e.what());
    }
    try {
        ScenarioConfig config;
        config.seed = doc.value("seed", std::uint64_t{0});
        config.stability_epsilon = doc.value("stability_epsilon", 0.01);
        config.initial_state = state_from_json(doc.at("initial_state"));
        for (const auto& jp : doc.at("periods")) {
            PeriodSpec spec;
            spec.label = jp.at("label").get<std::string>();
            spec.regime = regime_from_string(jp.at("regime").get<std::string>());
            spec.steps = jp.value("steps", 12);
            if (jp.contains("n_tot")) spec.n_tot = jp.at("n_tot").get<std::int64_t>();
            const bool has_params = jp.contains("params");
            const bool has_fit = jp.contains("fit");
            if (has_params == has_fit) {
                throw ValidationError("period '" + spec.label +
                                      "': give exactly one of params|fit");
            }
            if (has_params) {
                spec.params = params_from_json(jp.at("params"));
            } else {
                spec.fit_from_data = true;
                const auto& jf = jp.at("fit");
                spec.firms_csv = jf.value("firms", std::string());
                spec.rates_csv = jf.value("rates", std::string());
                if (jf.contains("year")) spec.fit_year = jf.at("year").get<int>();
                if (jf.contains("i_min")) spec.i_min = jf.at("i_min").get<double>();
                if (jf.contains("i_max")) spec.i_max = jf.at("i_max").get<double>();
            }
            config.periods.push_back(std::move(spec));
        }
        config.validate();
        return config;
    } catch (const json::exception& e) {
        throw ValidationError("'" + path + "': " + e.what());
    }
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
    config.validate();
    ScenarioReport report;
    SystemState state = config.initial_state;
    report.trajectory.push_back(state);
    for (const auto& spec : config.periods) {
        PeriodReport period = with_period_context(spec.label, [&] {
            PeriodReport out;
            out.label = spec.label;
            out.regime = spec.regime;
            out.params = spec.fit_from_data ? fitted_params(spec) : spec.params;
            out.product_loans = std::abs(out.params.alpha1 * out.params.mu);
            out.product_crisis = std::abs(out.params.alpha2 * out.params.beta);
            const double governing = spec.regime == Regime::LoansAccelerator
                                         ? out.product_loans
                                         : out.product_crisis;
            out.stability = classify_stability(governing, config.stability_epsilon);

            SystemState s = spec.n_tot ? with_population(state, *spec.n_tot) : state;
            out.trajectory.push_back(s);
            for (int k = 0; k < spec.steps; ++k) {
                s = step(s, spec.regime, out.params);
                out.trajectory.push_back(s);
            }
            out.end_state = s;
            return out;
        });
        // Stitch: the period start repeats the running trajectory's tail unless
        // a population update replaced it.
        if (spec.n_tot) {
            report.trajectory.back() = period.trajectory.front();
        }
        report.trajectory.insert(report.trajectory.end(),
                                 period.trajectory.begin() + 1,
                                 period.trajectory.end());
        state = period.end_state;
        report.periods.push_back(std::move(period));
    }
    return report;
}

std::vector<FirmRecord> generate_synthetic_population(std::int64_t n, double mu,
                                                      double beta, double rate,
                                                      const ModelParams& params,
                                                      std::uint64_t seed, int year) {
    if (n < 100) throw ValidationError("population needs n >= 100");
    if (!(mu < 0.0)) throw ValidationError("mu must be negative");
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    if (!(rate > 0.0)) throw ValidationError("rate must be positive");
    if (!(params.i_min > 0.0) || !(params.i_max > params.i_min)) {
        throw ValidationError("need 0 < i_min < i_max");
    }

    // One latent uniform drives both balance-sheet ratios, coupled so that the
    // weakest interest payers are also the weakest principal payers:
    //   loan resilience  l = i_min * U^(1/mu)        upper tail exponent mu
    //   ponzi resilience r = i_max * (1-U)^(1/beta)  lower tail exponent beta
    // Dividing by the rate puts the classification thresholds at l = rate and
    // r = rate, so the ponzi share comes out at (rate/i_max)^beta whenever the
    // hedge and fragile intervals of U do not overlap.
    Rng rng(seed, /*stream_tag=*/0xA0);
    std::vector<FirmRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    char id[32];
    for (std::int64_t k = 0; k < n; ++k) {
        const double u = rng.uniform01_open_min();
        const double loan_res = params.i_min * std::pow(u, 1.0 / mu);
        const double ponzi_res = params.i_max * std::pow(1.0 - u, 1.0 / beta);
        const double scale_bl = std::pow(10.0, 4.0 * rng.uniform01());
        const double scale_fc = std::pow(10.0, 4.0 * rng.uniform01());
        const double sales = std::pow(10.0, 4.0 * rng.uniform01());
        const double purchases = std::pow(10.0, 4.0 * rng.uniform01());

        FirmRecord r;
        std::snprintf(id, sizeof(id), "F%06lld", static_cast<long long>(k));
        r.firm_id = id;
        r.year = year;
        r.bank_loans = scale_bl;
        r.ebit = (loan_res / rate) * scale_bl;
        r.financial_costs = scale_fc;
        r.ebtda = (ponzi_res / rate) * scale_fc;
        r.sales = sales;
        r.purchases = purchases;
        r.sector = "Manufacturing";
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace minsky
