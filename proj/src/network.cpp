#include "minsky/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "minsky/errors.hpp"
#include "minsky/rng.hpp"

namespace minsky {

int TradeNetwork::add_node(const std::string& firm_id) {
    auto it = index_.find(firm_id);
    if (it != index_.end()) return it->second;
    const int idx = static_cast<int>(ids_.size());
    ids_.push_back(firm_id);
    index_.emplace(firm_id, idx);
    edge_slot_.emplace_back();
    in_.emplace_back();
    out_.emplace_back();
    in_w_.emplace_back();
    return idx;
}

void TradeNetwork::add_edge(const std::string& buyer, const std::string& supplier,
                            double weight) {
    if (buyer == supplier) {
        throw ValidationError("self-loop rejected for firm '" + buyer + "'");
    }
    if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw ValidationError("edge weight must be positive and finite");
    }
    const int b = add_node(buyer);
    const int s = add_node(supplier);
    auto& slots = edge_slot_[b];
    auto it = slots.find(s);
    if (it != slots.end()) {
        // Parallel edge: trade credit accumulates on the existing link.
        const int idx = it->second;
        edges_[idx].weight += weight;
        for (std::size_t k = 0; k < in_[s].size(); ++k) {
            if (in_[s][k] == b) {
                in_w_[s][k] = edges_[idx].weight;
                break;
            }
        }
        return;
    }
    slots.emplace(s, static_cast<int>(edges_.size()));
    edges_.push_back({b, s, weight});
    in_[s].push_back(b);
    in_w_[s].push_back(weight);
    out_[b].push_back(s);
}

bool TradeNetwork::has_node(const std::string& firm_id) const {
    return index_.count(firm_id) > 0;
}

int TradeNetwork::index_of(const std::string& firm_id) const {
    auto it = index_.find(firm_id);
    if (it == index_.end()) {
        throw ValidationError("unknown firm_id '" + firm_id + "'");
    }
    return it->second;
}

const std::string& TradeNetwork::id_of(int index) const { return ids_.at(index); }

const std::vector<int>& TradeNetwork::in_neighbors(int node) const {
    return in_.at(node);
}

const std::vector<int>& TradeNetwork::out_neighbors(int node) const {
    return out_.at(node);
}

const std::vector<double>& TradeNetwork::in_weights(int node) const {
    return in_w_.at(node);
}

void PercolationParams::validate() const {
    if (!(rho_c > 0.0) || rho_c > 1.0) throw ValidationError("rho_c must lie in (0,1]");
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    if (!(s > 0.0)) throw ValidationError("s must be positive");
}

void DegreeModel::validate() const {
    if (!(pareto_exponent > 1.0)) {
        throw ValidationError("pareto_exponent must exceed 1");
    }
    if (!(mean_degree > 0.0)) throw ValidationError("mean_degree must be positive");
    if (max_degree < 1) throw ValidationError("max_degree must be >= 1");
}

namespace {

// Mean of the discrete Pareto truncated to [k_min, k_max]:
// E[D] = (k_min - 1) + sum_{k >= k_min} P[D >= k].
double truncated_pareto_mean(double a, std::int64_t k_min, std::int64_t k_max) {
    const double t = std::pow(static_cast<double>(k_max) + 1.0, -a);
    const double denom = std::pow(static_cast<double>(k_min), -a) - t;
    double sum = 0.0;
    for (std::int64_t k = k_min; k <= k_max; ++k) {
        sum += (std::pow(static_cast<double>(k), -a) - t) / denom;
    }
    return static_cast<double>(k_min - 1) + sum;
}

struct DegreeSampler {
    double a = 0.0;
    std::int64_t k_max = 0;
    std::int64_t k_lo = 0;   // mixture of minimum degrees k_lo and k_lo + 1
    double p_lo = 1.0;       // probability of using k_lo

    std::int64_t draw(Rng& rng) const {
        const std::int64_t k_min =
            (p_lo >= 1.0 || rng.uniform01() < p_lo) ? k_lo : k_lo + 1;
        const double t = std::pow(static_cast<double>(k_max) + 1.0, -a);
        const double head = std::pow(static_cast<double>(k_min), -a) - t;
        const double u = rng.uniform01_open_min();
        const double k_star = std::pow(u * head + t, -1.0 / a);
        auto k = static_cast<std::int64_t>(std::floor(k_star));
        return std::clamp(k, k_min, k_max);
    }
};

// Chooses the minimum degree (as a two-point mixture) so the truncated Pareto
// hits the requested mean exactly in expectation.
DegreeSampler solve_degree_sampler(const DegreeModel& model) {
    DegreeSampler s;
    s.a = model.pareto_exponent;
    s.k_max = model.max_degree;
    const double target = model.mean_degree;
    if (truncated_pareto_mean(s.a, 1, s.k_max) >= target) {
        s.k_lo = 1;
        s.p_lo = 1.0;
        // The smallest admissible minimum already overshoots; accept the
        // pure k_min = 1 distribution (its mean is closest from above).
        if (truncated_pareto_mean(s.a, 1, s.k_max) > target * 1.1) {
            throw ValidationError(
                "mean_degree unreachable: too small for the exponent/truncation");
        }
        return s;
    }
    std::int64_t k = 1;
    while (k + 1 <= s.k_max && truncated_pareto_mean(s.a, k + 1, s.k_max) <= target) {
        ++k;
    }
    if (k + 1 > s.k_max) {
        throw ValidationError("mean_degree unreachable under max_degree truncation");
    }
    const double m_lo = truncated_pareto_mean(s.a, k, s.k_max);
    const double m_hi = truncated_pareto_mean(s.a, k + 1, s.k_max);
    s.k_lo = k;
    s.p_lo = (m_hi - target) / (m_hi - m_lo);
    return s;
}

std::string node_name(std::int64_t i) {
    std::string digits = std::to_string(i);
    std::string out = "F";
    for (std::size_t k = digits.size(); k < 6; ++k) out += '0';
    return out + digits;
}

}  // namespace

TradeNetwork generate_network(std::int64_t n, const DegreeModel& model,
                              std::uint64_t seed) {
    if (n < 2) throw ValidationError("generate_network needs n >= 2");
    model.validate();
    Rng deg_rng(seed, 1);
    Rng match_rng(seed, 2);
    Rng weight_rng(seed, 3);

    const DegreeSampler sampler = solve_degree_sampler(model);
    std::vector<std::int64_t> in_deg(n);
    std::int64_t total = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        in_deg[i] = sampler.draw(deg_rng);
        total += in_deg[i];
    }

    const double realized_mean = static_cast<double>(total) / static_cast<double>(n);
    if (std::fabs(realized_mean - model.mean_degree) > 0.1 * model.mean_degree) {
        throw NumericError("generate_network: realized mean in-degree " +
                           std::to_string(realized_mean) +
                           " misses the target by more than 10%");
    }

    // Out-degrees: Poisson at the matching mean, then conserve the stub total.
    std::vector<std::int64_t> out_deg(n);
    const double lambda = static_cast<double>(total) / static_cast<double>(n);
    std::int64_t out_total = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        out_deg[i] = deg_rng.poisson(lambda);
        out_total += out_deg[i];
    }
    while (out_total < total) {
        ++out_deg[deg_rng.below(static_cast<std::uint64_t>(n))];
        ++out_total;
    }
    while (out_total > total) {
        const auto i = deg_rng.below(static_cast<std::uint64_t>(n));
        if (out_deg[i] > 0) {
            --out_deg[i];
            --out_total;
        }
    }

    std::vector<std::int64_t> in_stubs, out_stubs;
    in_stubs.reserve(total);
    out_stubs.reserve(total);
    for (std::int64_t i = 0; i < n; ++i) {
        in_stubs.insert(in_stubs.end(), in_deg[i], i);
        out_stubs.insert(out_stubs.end(), out_deg[i], i);
    }
    match_rng.shuffle(in_stubs);
    match_rng.shuffle(out_stubs);

    // Resolve self-loops and duplicate ordered pairs: flag offenders, swap each
    // one's supplier stub with a random partner, re-validate the whole pairing.
    // Swaps inside the stub list preserve both degree sequences; the offender
    // count contracts geometrically for feasible sequences.
    const int max_passes = 500;
    bool clean = false;
    std::unordered_set<std::int64_t> seen;
    seen.reserve(in_stubs.size() * 2);
    for (int pass = 0; pass < max_passes; ++pass) {
        seen.clear();
        std::vector<std::size_t> bad;
        for (std::size_t k = 0; k < in_stubs.size(); ++k) {
            const std::int64_t key = out_stubs[k] * n + in_stubs[k];
            if (out_stubs[k] == in_stubs[k] || !seen.insert(key).second) {
                bad.push_back(k);
            }
        }
        if (bad.empty()) {
            clean = true;
            break;
        }
        for (std::size_t k : bad) {
            const std::size_t j = match_rng.below(in_stubs.size());
            std::swap(in_stubs[k], in_stubs[j]);
        }
    }
    if (!clean) {
        throw NumericError(
            "generate_network: could not resolve self-loops/duplicates, degree "
            "sequence too constrained");
    }

    TradeNetwork net;
    for (std::int64_t i = 0; i < n; ++i) net.add_node(node_name(i));
    const double log_span = std::log(1e4);
    for (std::size_t k = 0; k < in_stubs.size(); ++k) {
        const double w = std::exp(weight_rng.uniform01() * log_span);
        net.add_edge(node_name(out_stubs[k]), node_name(in_stubs[k]), w);
    }
    return net;
}

double expected_failures(double density, const PercolationParams& params) {
    params.validate();
    if (density < 0.0) throw ValidationError("density must be >= 0");
    if (density >= params.rho_c) throw SupercriticalError(density, params.rho_c);
    return params.s * std::pow(1.0 - density / params.rho_c, -params.gamma);
}

double critical_density_from_rate(double rate_c, const ModelParams& params) {
    params.validate();
    if (!(rate_c > 0.0) || rate_c > params.i_max) {
        throw ValidationError("rate_c must lie in (0, i_max]");
    }
    return std::pow(rate_c / params.i_max, params.beta);
}

namespace {

std::vector<MinskyStatus> resolve_statuses(
    const TradeNetwork& net, const std::map<std::string, MinskyStatus>& statuses) {
    std::vector<MinskyStatus> out(net.node_count());
    for (std::size_t i = 0; i < net.node_count(); ++i) {
        auto it = statuses.find(net.id_of(static_cast<int>(i)));
        if (it == statuses.end()) {
            throw ValidationError("no status for network firm '" +
                                  net.id_of(static_cast<int>(i)) + "'");
        }
        out[i] = it->second;
    }
    return out;
}

}  // namespace

CascadeReport failure_cascade(const TradeNetwork& net,
                              const std::map<std::string, MinskyStatus>& statuses,
                              const std::set<std::string>& initial_failures) {
    const auto status = resolve_statuses(net, statuses);
    std::vector<char> failed(net.node_count(), 0);
    for (const auto& id : initial_failures) {
        failed[net.index_of(id)] = 1;  // index_of validates membership
    }
    CascadeReport report;
    report.initial = initial_failures.size();
    for (const auto& id : initial_failures) report.affected.insert(id);

    while (true) {
        std::vector<int> next;
        for (std::size_t i = 0; i < net.node_count(); ++i) {
            if (failed[i] || status[i] != MinskyStatus::Ponzi) continue;
            bool touched = false;
            for (int j : net.in_neighbors(static_cast<int>(i))) {
                if (failed[j]) {
                    touched = true;
                    break;
                }
            }
            if (!touched) {
                for (int j : net.out_neighbors(static_cast<int>(i))) {
                    if (failed[j]) {
                        touched = true;
                        break;
                    }
                }
            }
            if (touched) next.push_back(static_cast<int>(i));
        }
        if (next.empty()) break;
        std::vector<std::string> round_ids;
        round_ids.reserve(next.size());
        for (int i : next) {
            failed[i] = 1;  // applied after the scan: rounds are synchronous
            round_ids.push_back(net.id_of(i));
            report.affected.insert(net.id_of(i));
        }
        report.rounds.push_back(std::move(round_ids));
    }
    return report;
}

CascadeReport bootstrap_cascade(const TradeNetwork& net,
                                const std::map<std::string, MinskyStatus>& statuses,
                                double threshold, ThresholdMode mode) {
    if (!(threshold > 0.0)) throw ValidationError("threshold must be positive");
    if (mode == ThresholdMode::FractionOfBuyers && threshold > 1.0) {
        throw ValidationError("fraction threshold must not exceed 1");
    }
    auto status = resolve_statuses(net, statuses);
    CascadeReport report;
    for (std::size_t i = 0; i < net.node_count(); ++i) {
        if (status[i] == MinskyStatus::Ponzi) ++report.initial;
    }
    while (true) {
        std::vector<int> next;
        for (std::size_t i = 0; i < net.node_count(); ++i) {
            if (status[i] != MinskyStatus::Hedge) continue;
            const auto& buyers = net.in_neighbors(static_cast<int>(i));
            if (buyers.empty()) continue;  // no signal, never converts
            std::int64_t ponzi_buyers = 0;
            for (int j : buyers) {
                if (status[j] == MinskyStatus::Ponzi) ++ponzi_buyers;
            }
            const bool trips =
                mode == ThresholdMode::FractionOfBuyers
                    ? static_cast<double>(ponzi_buyers) /
                              static_cast<double>(buyers.size()) >=
                          threshold
                    : static_cast<double>(ponzi_buyers) >= threshold;
            if (trips) next.push_back(static_cast<int>(i));
        }
        if (next.empty()) break;
        std::vector<std::string> round_ids;
        round_ids.reserve(next.size());
        for (int i : next) {
            status[i] = MinskyStatus::Ponzi;
            round_ids.push_back(net.id_of(i));
            report.affected.insert(net.id_of(i));
        }
        report.rounds.push_back(std::move(round_ids));
    }
    return report;
}

double ponzi_buyer_ratio(const TradeNetwork& net,
                         const std::map<std::string, MinskyStatus>& statuses,
                         const std::string& supplier) {
    const int idx = net.index_of(supplier);
    const auto& buyers = net.in_neighbors(idx);
    if (buyers.empty()) {
        throw NumericError("ponzi_buyer_ratio undefined: '" + supplier +
                           "' has no buyers");
    }
    std::int64_t ponzi = 0;
    for (int j : buyers) {
        auto it = statuses.find(net.id_of(j));
        if (it == statuses.end()) {
            throw ValidationError("no status for buyer '" + net.id_of(j) + "'");
        }
        if (it->second == MinskyStatus::Ponzi) ++ponzi;
    }
    return static_cast<double>(ponzi) / static_cast<double>(buyers.size());
}

}  // namespace minsky
