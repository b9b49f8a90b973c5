#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minsky/estimation.hpp"
#include "minsky/firm.hpp"
#include "minsky/network.hpp"

namespace minsky {

struct SupplierSelection {
    std::string supplier_id;
    double coverage = 0.0;       // invoice total / sales, first year
    double coverage_next = 0.0;  // same numerator over second-year sales
    bool included = false;
    std::string exclusion_reason;  // "disappeared", "coverage", or "sector"
};

struct SelectionSummary {
    std::vector<SupplierSelection> suppliers;
    int excluded_disappeared = 0;
    int excluded_coverage = 0;
    int excluded_sector = 0;

    std::vector<std::string> included_ids() const;
};

// Keeps suppliers whose known invoice total covers 50%..120% of sales in both
// years and (optionally) whose sector matches. Candidates are the network
// nodes with at least one buyer. Exclusions are reported, not fatal.
SelectionSummary select_suppliers(const std::vector<FirmRecord>& year_t,
                                  const std::vector<FirmRecord>& year_t1,
                                  const TradeNetwork& net,
                                  const std::optional<std::string>& sector_filter);

// Trade-credit-weighted growth of a supplier's buyers' purchases. Buyers with
// zero, missing, or absent prior purchases are skipped and counted. With
// normalize = true the sum is divided by the total weight of eligible buyers,
// making it a pure growth ratio.
double estimated_growth(const TradeNetwork& net,
                        const std::map<std::string, double>& purchases_t,
                        const std::map<std::string, double>& purchases_t1,
                        const std::string& supplier, bool normalize = true,
                        int* n_skipped_buyers = nullptr);

// sales_{t+1} / sales_t. Throws on zero prior sales or missing fields.
double realized_growth(const FirmRecord& record_t, const FirmRecord& record_t1);

struct GrowthPair {
    std::string supplier_id;
    double estimated = 0.0;
    double realized = 0.0;
    MinskyStatus status_from = MinskyStatus::Hedge;
    MinskyStatus status_to = MinskyStatus::Hedge;
};

// Selects pairs for fit_growth_correlation: an exact status, anything but
// Hedge, or no constraint.
struct StatusFilter {
    enum class Kind { Exact, NotHedge, Any };
    Kind kind = Kind::Any;
    MinskyStatus status = MinskyStatus::Hedge;

    static StatusFilter exact(MinskyStatus s) { return {Kind::Exact, s}; }
    static StatusFilter not_hedge() { return {Kind::NotHedge, MinskyStatus::Hedge}; }
    static StatusFilter any() { return {Kind::Any, MinskyStatus::Hedge}; }

    bool matches(MinskyStatus s) const;
};

// Power-law correlation of realized on estimated growth: OLS of ln(realized)
// on ln(estimated) over the pairs whose transition matches the group filters.
// Pairs with a non-positive ratio are dropped and counted as excluded.
FitResult fit_growth_correlation(const std::vector<GrowthPair>& pairs,
                                 const StatusFilter& from, const StatusFilter& to);

struct TransitionHistogram {
    double bin_width = 0.05;
    std::vector<double> stayers;  // normalized frequencies per bin
    std::vector<double> leavers;
    std::optional<double> crossing;  // midpoint of first bin where leavers exceed
    int n_stayers = 0;
    int n_leavers = 0;
};

// Histograms of ponzi-buyer ratios for suppliers that stayed Hedge vs left.
// Each non-empty histogram is normalized to sum 1. The crossing estimate is
// the midpoint of the first bin where the leaver frequency strictly exceeds
// the stayer frequency.
TransitionHistogram transition_histogram(
    const std::vector<std::pair<double, bool>>& ratios, double bin_width = 0.05);

struct QuadrantCounts {
    int est_up_real_up = 0;
    int est_up_real_down = 0;
    int est_down_real_up = 0;    // "too dynamic to fail" corner
    int est_down_real_down = 0;
};

// Splits pairs at 1.0 on both axes. Boundary values count as "up".
QuadrantCounts quadrant_counts(const std::vector<GrowthPair>& pairs);

}  // namespace minsky
