#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "minsky/dynamics.hpp"
#include "minsky/firm.hpp"

namespace minsky {

// Directed weighted trade-credit graph. An edge runs from the trade debtor
// (buyer) to the trade creditor (supplier); its weight is the summed trade
// credit of the period. No self-loops; parallel edges merge by weight addition.
class TradeNetwork {
public:
    struct Edge {
        int buyer = 0;
        int supplier = 0;
        double weight = 0.0;
    };

    // Returns the node's index, creating it if unseen.
    int add_node(const std::string& firm_id);

    // Merges parallel edges; rejects self-loops and non-positive weights.
    void add_edge(const std::string& buyer, const std::string& supplier, double weight);

    bool has_node(const std::string& firm_id) const;
    int index_of(const std::string& firm_id) const;  // ValidationError if absent
    const std::string& id_of(int index) const;

    std::size_t node_count() const { return ids_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    // Buyers of a supplier: sources of its incoming edges. Indices into nodes.
    const std::vector<int>& in_neighbors(int node) const;
    const std::vector<int>& out_neighbors(int node) const;
    const std::vector<double>& in_weights(int node) const;

    std::vector<std::string> node_ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
    std::map<std::string, int> index_;
    std::vector<Edge> edges_;
    std::vector<std::map<int, int>> edge_slot_;  // buyer -> (supplier -> edge idx)
    std::vector<std::vector<int>> in_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<double>> in_w_;
};

// Closed-form percolation failure count parameters.
struct PercolationParams {
    double rho_c = 0.0;  // critical density, in (0, 1]
    double gamma = 0.0;  // network exponent, > 0
    double s = 0.0;      // initialization constant, > 0

    void validate() const;
};

// In-degree model for generation: cumulative tail exponent (> 1), target mean,
// and a hard cap on any single in-degree.
struct DegreeModel {
    double pareto_exponent = 1.3;
    double mean_degree = 35.5;
    std::int64_t max_degree = 1000;

    void validate() const;
};

// Configuration-model digraph. In-degrees follow a discrete Pareto truncated at
// max_degree whose minimum degree is solved so the realized mean lands within
// 10% of mean_degree; out-degrees are Poisson, adjusted to conserve stubs.
// Stub pairing is a seeded uniform shuffle; self-loops and duplicate pairs are
// re-drawn. Edge weights are log-uniform in [1, 1e4].
TradeNetwork generate_network(std::int64_t n, const DegreeModel& model, std::uint64_t seed);

// S * (1 - rho/rho_c)^(-gamma). Throws SupercriticalError once rho >= rho_c.
double expected_failures(double density, const PercolationParams& params);

// (rate_c / i_max)^beta for 0 < rate_c <= i_max.
double critical_density_from_rate(double rate_c, const ModelParams& params);

struct CascadeReport {
    std::vector<std::vector<std::string>> rounds;  // new failures/conversions per round
    std::set<std::string> affected;                // failed or converted nodes
    std::size_t initial = 0;                       // seed size (round 0)
};

// Synchronous failure contagion: each round, every not-yet-failed Ponzi node
// with at least one failed trade partner (either edge direction) fails.
// initial_failures must be existing nodes; statuses must cover every node.
CascadeReport failure_cascade(const TradeNetwork& net,
                              const std::map<std::string, MinskyStatus>& statuses,
                              const std::set<std::string>& initial_failures);

enum class ThresholdMode { FractionOfBuyers, AbsoluteCount };

// Synchronous bootstrap contagion: a Hedge node turns Ponzi once its ponzi
// in-neighbor ratio (FractionOfBuyers) or count (AbsoluteCount) reaches the
// threshold. Zero-in-degree nodes never convert.
CascadeReport bootstrap_cascade(const TradeNetwork& net,
                                const std::map<std::string, MinskyStatus>& statuses,
                                double threshold, ThresholdMode mode);

// Share of a supplier's buyers currently Ponzi. Zero in-degree is an undefined
// signal and throws NumericError; unknown supplier throws ValidationError.
double ponzi_buyer_ratio(const TradeNetwork& net,
                         const std::map<std::string, MinskyStatus>& statuses,
                         const std::string& supplier);

}  // namespace minsky
