// Command-line front end: fit, classify, simulate, network gen, contagion run,
// analyze growth, scenario run, generate population. Exit codes: 0 success,
// 2 validation error, 3 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "minsky/dynamics.hpp"
#include "minsky/errors.hpp"
#include "minsky/estimation.hpp"
#include "minsky/firm.hpp"
#include "minsky/growth.hpp"
#include "minsky/io.hpp"
#include "minsky/network.hpp"
#include "minsky/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace minsky;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string config;
    std::string out = ".";
    std::string format = "csv";
};

fs::path out_path(const GlobalOpts& g, const std::string& name) {
    fs::create_directories(g.out);
    return fs::path(g.out) / name;
}

bool json_output(const GlobalOpts& g) { return g.format == "json"; }

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot create '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

json state_to_json(const SystemState& s, Regime regime) {
    return json{{"t", s.t},
                {"regime", to_string(regime)},
                {"rate", s.rate},
                {"loans_fraction", s.loans_fraction},
                {"ponzi_density", s.ponzi_density},
                {"n_tot", s.n_tot},
                {"n_loans", s.n_loans},
                {"n_ponzi", s.n_ponzi},
                {"clamped", s.clamped}};
}

void emit_trajectory(const GlobalOpts& g, const std::vector<SystemState>& traj,
                     const std::vector<Regime>& regimes) {
    if (json_output(g)) {
        json rows = json::array();
        for (std::size_t k = 0; k < traj.size(); ++k) {
            rows.push_back(state_to_json(traj[k], regimes[k]));
        }
        write_json(out_path(g, "trajectory.json"), rows);
    } else {
        io::write_trajectory_csv(out_path(g, "trajectory.csv").string(), traj, regimes);
    }
}

// ---- classify ---------------------------------------------------------------

void cmd_classify(const GlobalOpts& g, const std::string& firms) {
    const auto ds = io::read_firm_csv(firms);
    for (const auto& e : ds.row_errors) {
        std::cerr << "warning: " << firms << " line " << e.line << ": " << e.reason
                  << '\n';
    }
    if (ds.header_only) std::cerr << "warning: " << firms << " has no data rows\n";

    std::ofstream statuses(out_path(g, "statuses.csv"));
    if (!statuses) throw ValidationError("cannot create statuses.csv");
    statuses << "firm_id,year,status\n";
    std::map<int, PopulationUpdate> by_year;
    json jrows = json::array();
    for (const auto& r : ds.records) {
        const MinskyStatus status = classify(r);
        statuses << r.firm_id << ',' << r.year << ',' << to_string(status) << '\n';
        auto& pop = by_year[r.year];
        pop.year = r.year;
        ++pop.n_tot;
        if (status == MinskyStatus::Hedge) ++pop.n_hedge;
        if (status == MinskyStatus::Ponzi) ++pop.n_ponzi;
        if (json_output(g)) {
            jrows.push_back({{"firm_id", r.firm_id},
                             {"year", r.year},
                             {"status", to_string(status)}});
        }
    }
    std::vector<PopulationUpdate> pops;
    for (const auto& [year, pop] : by_year) pops.push_back(pop);
    io::write_population_csv(out_path(g, "population.csv").string(), pops);
    if (json_output(g)) write_json(out_path(g, "statuses.json"), jrows);
}

// ---- fit --------------------------------------------------------------------

// Per-year tail fits, with rate bounds calibrated against the following
// year's mean observed rate when a rate series is supplied (the cobweb maps
// this year's density into next year's rate).
void cmd_fit(const GlobalOpts& g, const std::string& firms, const std::string& rates) {
    const auto ds = io::read_firm_csv(firms);
    const auto years = ds.years();
    if (years.empty()) throw ValidationError("no records to fit");

    struct YearFit {
        int year;
        FitResult mu, beta;
        double hedge_share, ponzi_share;
    };
    std::vector<YearFit> fits;
    for (int year : years) {
        const auto recs = ds.for_year(year);
        YearFit f{year, fit_mu(recs), fit_beta(recs), 0.0, 0.0};
        std::int64_t n = 0, nh = 0, np = 0;
        for (const auto& r : recs) {
            try {
                const MinskyStatus s = classify(r);
                ++n;
                if (s == MinskyStatus::Hedge) ++nh;
                if (s == MinskyStatus::Ponzi) ++np;
            } catch (const MissingFieldError&) {
            }
        }
        if (n > 0) {
            f.hedge_share = static_cast<double>(nh) / static_cast<double>(n);
            f.ponzi_share = static_cast<double>(np) / static_cast<double>(n);
        }
        fits.push_back(f);
    }

    std::optional<double> i_min_b, i_max_b;
    if (!rates.empty()) {
        const auto series = io::read_rate_csv(rates);
        std::map<int, std::pair<double, int>> rate_sum;
        for (const auto& obs : series) {
            auto& [sum, count] = rate_sum[year_of_period(obs.period)];
            sum += obs.rate;
            ++count;
        }
        RateSeries next_rates;
        std::vector<double> hedge, ponzi;
        for (const auto& f : fits) {
            const auto it = rate_sum.find(f.year + 1);
            if (it == rate_sum.end()) continue;
            if (!(f.hedge_share > 0.0 && f.hedge_share < 1.0)) continue;
            if (!(f.ponzi_share > 0.0 && f.ponzi_share < 1.0)) continue;
            next_rates.push_back(
                {f.year + 1, it->second.first / it->second.second});
            hedge.push_back(f.hedge_share);
            ponzi.push_back(f.ponzi_share);
        }
        i_min_b = calibrate_bound(fits.front().mu, next_rates, hedge,
                                  Regime::LoansAccelerator);
        i_max_b = calibrate_bound(fits.front().beta, next_rates, ponzi,
                                  Regime::CrisisAccelerator);
    }

    const auto cell = [](const std::optional<double>& v) {
        return v ? io::format_number(*v) : std::string();
    };
    std::ofstream out(out_path(g, "fit.csv"));
    if (!out) throw ValidationError("cannot create fit.csv");
    out << "year,mu,i_min,beta,i_max,r2_mu,r2_beta,n_excluded\n";
    json jrows = json::array();
    for (const auto& f : fits) {
        out << f.year << ',' << io::format_number(f.mu.slope) << ',' << cell(i_min_b)
            << ',' << io::format_number(f.beta.slope) << ',' << cell(i_max_b) << ','
            << io::format_number(f.mu.r_squared) << ','
            << io::format_number(f.beta.r_squared) << ','
            << (f.mu.n_excluded + f.beta.n_excluded) << '\n';
        if (json_output(g)) {
            json row{{"year", f.year},
                     {"mu", f.mu.slope},
                     {"beta", f.beta.slope},
                     {"r2_mu", f.mu.r_squared},
                     {"r2_beta", f.beta.r_squared},
                     {"n_excluded", f.mu.n_excluded + f.beta.n_excluded}};
            if (i_min_b) row["i_min"] = *i_min_b;
            if (i_max_b) row["i_max"] = *i_max_b;
            jrows.push_back(row);
        }
    }
    if (json_output(g)) write_json(out_path(g, "fit.json"), jrows);
}

// ---- simulate ---------------------------------------------------------------

struct SimulateOpts {
    std::string regime = "crisis";
    int steps = 12;
    ModelParams params;
    double rate0 = 0.0;
    std::optional<double> loans0, ponzi0;
    std::int64_t n_tot = 0;
};

void cmd_simulate(const GlobalOpts& g, const SimulateOpts& o) {
    o.params.validate();
    const Regime regime = regime_from_string(o.regime);
    if (o.steps < 0) throw ValidationError("steps must be non-negative");
    SystemState s;
    s.rate = o.rate0;
    s.n_tot = o.n_tot;
    s.loans_fraction = o.loans0 ? *o.loans0 : loans_fraction(o.rate0, o.params);
    s.ponzi_density = o.ponzi0 ? *o.ponzi0 : ponzi_fraction(o.rate0, o.params);
    s.n_loans = count_from_fraction(s.loans_fraction, s.n_tot);
    s.n_ponzi = count_from_fraction(s.ponzi_density, s.n_tot);
    s.validate();

    const auto traj = run_trajectory(s, {{"simulate", regime, o.params}}, o.steps);
    const std::vector<Regime> regimes(traj.size(), regime);
    emit_trajectory(g, traj, regimes);
}

// ---- network gen ------------------------------------------------------------

void cmd_network_gen(const GlobalOpts& g, std::int64_t n, const DegreeModel& model) {
    const TradeNetwork net = generate_network(n, model, g.seed);
    io::write_edge_csv(out_path(g, "edges.csv").string(), net);
    if (json_output(g)) {
        json rows = json::array();
        for (const auto& e : net.edges()) {
            rows.push_back({{"buyer_id", net.id_of(e.buyer)},
                            {"supplier_id", net.id_of(e.supplier)},
                            {"weight", e.weight}});
        }
        write_json(out_path(g, "edges.json"), rows);
    }
}

// ---- contagion run ----------------------------------------------------------

struct ContagionOpts {
    std::string edges, statuses, mode = "failure";
    std::vector<std::string> seeds;
    double threshold = 0.0;
    std::string threshold_mode = "fraction";
};

void cmd_contagion(const GlobalOpts& g, const ContagionOpts& o) {
    const TradeNetwork net = io::read_edge_csv(o.edges);
    const auto statuses = io::read_status_csv(o.statuses);
    CascadeReport report;
    if (o.mode == "failure") {
        const std::set<std::string> seeds(o.seeds.begin(), o.seeds.end());
        report = failure_cascade(net, statuses, seeds);
    } else if (o.mode == "bootstrap") {
        const ThresholdMode mode = o.threshold_mode == "count"
                                       ? ThresholdMode::AbsoluteCount
                                       : ThresholdMode::FractionOfBuyers;
        report = bootstrap_cascade(net, statuses, o.threshold, mode);
    } else {
        throw ValidationError("mode must be failure|bootstrap");
    }
    io::write_cascade_csv(out_path(g, "cascade.csv").string(), report);
    if (json_output(g)) {
        json rounds = json::array();
        for (const auto& r : report.rounds) {
            rounds.push_back(json(r));
        }
        write_json(out_path(g, "cascade.json"),
                   json{{"initial", report.initial},
                        {"affected", report.affected.size()},
                        {"rounds", rounds}});
    }
}

// ---- analyze growth ---------------------------------------------------------

struct GrowthOpts {
    std::string firms, edges, sector;
    int year_from = 0, year_to = 0;
};

void cmd_analyze_growth(const GlobalOpts& g, const GrowthOpts& o) {
    const auto ds = io::read_firm_csv(o.firms);
    const TradeNetwork net = io::read_edge_csv(o.edges);
    const auto recs_from = ds.for_year(o.year_from);
    const auto recs_to = ds.for_year(o.year_to);
    if (recs_from.empty() || recs_to.empty()) {
        throw ValidationError("both years need records");
    }

    const std::optional<std::string> sector =
        o.sector.empty() ? std::nullopt : std::optional<std::string>(o.sector);
    const auto selection = select_suppliers(recs_from, recs_to, net, sector);
    std::map<std::string, MinskyStatus> statuses;
    std::map<std::string, double> purchases_from, purchases_to;
    std::map<std::string, const FirmRecord*> from_ix, to_ix;
    for (const auto& r : recs_from) {
        from_ix[r.firm_id] = &r;
        if (r.purchases) purchases_from[r.firm_id] = *r.purchases;
        try {
            statuses[r.firm_id] = classify(r);
        } catch (const MissingFieldError&) {
        }
    }
    for (const auto& r : recs_to) {
        to_ix[r.firm_id] = &r;
        if (r.purchases) purchases_to[r.firm_id] = *r.purchases;
    }

    std::ofstream out(out_path(g, "growth.csv"));
    if (!out) throw ValidationError("cannot create growth.csv");
    out << "supplier_id,estimated,realized,status_from,status_to,ponzi_buyer_ratio\n";
    json jrows = json::array();
    std::vector<GrowthPair> pairs;
    std::vector<std::pair<double, bool>> hedge_ratios;
    for (const auto& id : selection.included_ids()) {
        const double est = estimated_growth(net, purchases_from, purchases_to, id);
        const double real = realized_growth(*from_ix.at(id), *to_ix.at(id));
        const MinskyStatus from = classify(*from_ix.at(id));
        const MinskyStatus to = classify(*to_ix.at(id));
        std::string ratio_cell;
        std::optional<double> ratio;
        try {
            ratio = ponzi_buyer_ratio(net, statuses, id);
            ratio_cell = io::format_number(*ratio);
        } catch (const ValidationError&) {
        } catch (const NumericError&) {
        }
        pairs.push_back({id, est, real, from, to});
        if (ratio && from == MinskyStatus::Hedge) {
            hedge_ratios.push_back({*ratio, to == MinskyStatus::Hedge});
        }
        out << id << ',' << io::format_number(est) << ',' << io::format_number(real)
            << ',' << to_string(from) << ',' << to_string(to) << ',' << ratio_cell
            << '\n';
        if (json_output(g)) {
            json row{{"supplier_id", id},
                     {"estimated", est},
                     {"realized", real},
                     {"status_from", to_string(from)},
                     {"status_to", to_string(to)}};
            if (ratio) row["ponzi_buyer_ratio"] = *ratio;
            jrows.push_back(row);
        }
    }
    if (json_output(g)) write_json(out_path(g, "growth.json"), jrows);

    json summary;
    const auto add_fit = [&](const char* name, const StatusFilter& from,
                             const StatusFilter& to) {
        try {
            const FitResult fit = fit_growth_correlation(pairs, from, to);
            summary["fits"][name] = {{"slope", fit.slope},
                                     {"intercept", fit.intercept},
                                     {"r_squared", fit.r_squared},
                                     {"n_points", fit.n_points}};
        } catch (const ValidationError&) {
        }
    };
    add_fit("all", StatusFilter::any(), StatusFilter::any());
    add_fit("hedge_to_hedge", StatusFilter::exact(MinskyStatus::Hedge),
            StatusFilter::exact(MinskyStatus::Hedge));
    add_fit("hedge_to_non_hedge", StatusFilter::exact(MinskyStatus::Hedge),
            StatusFilter::not_hedge());

    if (!hedge_ratios.empty()) {
        const TransitionHistogram hist = transition_histogram(hedge_ratios);
        json jh{{"bin_width", hist.bin_width},
                {"stayers", hist.stayers},
                {"leavers", hist.leavers},
                {"n_stayers", hist.n_stayers},
                {"n_leavers", hist.n_leavers}};
        if (hist.crossing) jh["crossing"] = *hist.crossing;
        summary["transition_histogram"] = jh;
    }

    const QuadrantCounts q = quadrant_counts(pairs);
    summary["quadrants"] = {{"est_up_real_up", q.est_up_real_up},
                            {"est_up_real_down", q.est_up_real_down},
                            {"est_down_real_up", q.est_down_real_up},
                            {"est_down_real_down", q.est_down_real_down}};
    summary["excluded"] = {{"disappeared", selection.excluded_disappeared},
                           {"coverage", selection.excluded_coverage},
                           {"sector", selection.excluded_sector}};
    write_json(out_path(g, "growth_summary.json"), summary);
}

// ---- scenario run -----------------------------------------------------------

void cmd_scenario_run(const GlobalOpts& g) {
    if (g.config.empty()) throw ValidationError("scenario run needs --config");
    ScenarioConfig config = load_scenario_config(g.config);
    if (g.seed != 0) config.seed = g.seed;
    const ScenarioReport report = run_scenario(config);

    std::vector<Regime> regimes;
    regimes.push_back(config.periods.front().regime);
    for (std::size_t k = 0; k < config.periods.size(); ++k) {
        for (int s = 0; s < config.periods[k].steps; ++s) {
            regimes.push_back(config.periods[k].regime);
        }
    }
    emit_trajectory(g, report.trajectory, regimes);

    json periods = json::array();
    for (const auto& p : report.periods) {
        periods.push_back(
            {{"label", p.label},
             {"regime", to_string(p.regime)},
             {"params",
              {{"mu", p.params.mu},
               {"beta", p.params.beta},
               {"alpha1", p.params.alpha1},
               {"alpha2", p.params.alpha2},
               {"i_min", p.params.i_min},
               {"i_max", p.params.i_max}}},
             {"product_loans", p.product_loans},
             {"product_crisis", p.product_crisis},
             {"stability", to_string(p.stability.kind)},
             {"end_state", state_to_json(p.end_state, p.regime)}});
    }
    write_json(out_path(g, "report.json"), json{{"periods", periods}});
}

// ---- generate population ----------------------------------------------------

struct GenerateOpts {
    std::int64_t n = 0;
    double mu = 0.0, beta = 0.0, rate = 0.0;
    ModelParams params;
    int year = 0;
};

void cmd_generate_population(const GlobalOpts& g, const GenerateOpts& o) {
    ModelParams params = o.params;
    params.mu = o.mu;
    params.beta = o.beta;
    const auto records = generate_synthetic_population(o.n, o.mu, o.beta, o.rate,
                                                       params, g.seed, o.year);
    io::write_firm_csv(out_path(g, "firms.csv").string(), records);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minsky crisis-accelerator toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "Seed for stochastic commands");
    app.add_option("--config", g.config, "JSON config path");
    app.add_option("--out", g.out, "Output directory (default .)");
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "Classify firm records");
    std::string classify_firms;
    classify_cmd->add_option("--firms", classify_firms, "Firm records CSV")
        ->required();
    classify_cmd->callback([&] { cmd_classify(g, classify_firms); });

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit tail exponents per year");
    std::string fit_firms, fit_rates;
    fit_cmd->add_option("--firms", fit_firms, "Firm records CSV")->required();
    fit_cmd->add_option("--rates", fit_rates, "Rate series CSV for bound calibration");
    fit_cmd->callback([&] { cmd_fit(g, fit_firms, fit_rates); });

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run one cobweb trajectory");
    SimulateOpts sim;
    sim_cmd->add_option("--regime", sim.regime, "loans|crisis")->required();
    sim_cmd->add_option("--steps", sim.steps, "Steps (default 12)");
    sim_cmd->add_option("--mu", sim.params.mu, "Upper-tail exponent (< 0)")->required();
    sim_cmd->add_option("--beta", sim.params.beta, "Lower-tail exponent (> 0)")->required();
    sim_cmd->add_option("--alpha1", sim.params.alpha1, "Loans feedback exponent")->required();
    sim_cmd->add_option("--alpha2", sim.params.alpha2, "Crisis feedback exponent")->required();
    sim_cmd->add_option("--i-min", sim.params.i_min, "Lower rate bound")->required();
    sim_cmd->add_option("--i-max", sim.params.i_max, "Upper rate bound")->required();
    sim_cmd->add_option("--rate0", sim.rate0, "Initial rate, percent/year")->required();
    double loans0 = -1.0, ponzi0 = -1.0;
    sim_cmd->add_option("--loans0", loans0, "Initial loans fraction");
    sim_cmd->add_option("--ponzi0", ponzi0, "Initial ponzi density");
    sim_cmd->add_option("--n-tot", sim.n_tot, "Population size for count columns");
    sim_cmd->callback([&] {
        if (loans0 >= 0.0) sim.loans0 = loans0;
        if (ponzi0 >= 0.0) sim.ponzi0 = ponzi0;
        cmd_simulate(g, sim);
    });

    // network gen
    auto* net_cmd = app.add_subcommand("network", "Trade-network commands");
    net_cmd->require_subcommand(1);
    auto* net_gen = net_cmd->add_subcommand("gen", "Generate a synthetic network");
    std::int64_t net_n = 0;
    DegreeModel model;
    net_gen->add_option("--n", net_n, "Node count")->required();
    net_gen->add_option("--pareto-exponent", model.pareto_exponent,
                        "In-degree tail exponent (default 1.3)");
    net_gen->add_option("--mean-degree", model.mean_degree, "Mean degree (default 35.5)");
    net_gen->add_option("--max-degree", model.max_degree, "Degree cap (default 1000)");
    net_gen->callback([&] { cmd_network_gen(g, net_n, model); });

    // contagion run
    auto* cont_cmd = app.add_subcommand("contagion", "Cascade commands");
    cont_cmd->require_subcommand(1);
    auto* cont_run = cont_cmd->add_subcommand("run", "Run a cascade");
    ContagionOpts cont;
    cont_run->add_option("--edges", cont.edges, "Edge list CSV")->required();
    cont_run->add_option("--statuses", cont.statuses, "Status CSV")->required();
    cont_run->add_option("--mode", cont.mode, "failure|bootstrap (default failure)");
    cont_run->add_option("--seeds", cont.seeds, "Initially failed firm ids");
    cont_run->add_option("--threshold", cont.threshold, "Bootstrap threshold");
    cont_run->add_option("--threshold-mode", cont.threshold_mode,
                         "fraction|count (default fraction)");
    cont_run->callback([&] { cmd_contagion(g, cont); });

    // analyze growth
    auto* an_cmd = app.add_subcommand("analyze", "Analysis commands");
    an_cmd->require_subcommand(1);
    auto* an_growth = an_cmd->add_subcommand("growth", "Estimated vs realized growth");
    GrowthOpts growth;
    an_growth->add_option("--firms", growth.firms, "Firm records CSV")->required();
    an_growth->add_option("--edges", growth.edges, "Edge list CSV")->required();
    an_growth->add_option("--year-from", growth.year_from, "Base year")->required();
    an_growth->add_option("--year-to", growth.year_to, "Comparison year")->required();
    an_growth->add_option("--sector", growth.sector, "Restrict suppliers to a sector");
    an_growth->callback([&] { cmd_analyze_growth(g, growth); });

    // scenario run
    auto* sc_cmd = app.add_subcommand("scenario", "Scenario commands");
    sc_cmd->require_subcommand(1);
    auto* sc_run = sc_cmd->add_subcommand("run", "Run a configured scenario");
    sc_run->callback([&] { cmd_scenario_run(g); });

    // generate population
    auto* gen_cmd = app.add_subcommand("generate", "Synthetic data commands");
    gen_cmd->require_subcommand(1);
    auto* gen_pop = gen_cmd->add_subcommand("population", "Generate firm records");
    GenerateOpts gen;
    gen_pop->add_option("--n", gen.n, "Number of firms")->required();
    gen_pop->add_option("--mu", gen.mu, "Upper-tail exponent (< 0)")->required();
    gen_pop->add_option("--beta", gen.beta, "Lower-tail exponent (> 0)")->required();
    gen_pop->add_option("--rate", gen.rate, "Prevailing rate, percent/year")->required();
    gen_pop->add_option("--i-min", gen.params.i_min, "Lower rate bound")->required();
    gen_pop->add_option("--i-max", gen.params.i_max, "Upper rate bound")->required();
    gen_pop->add_option("--year", gen.year, "Year stamped on the records");
    gen_pop->callback([&] { cmd_generate_population(g, gen); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
