#include "minsky/growth.hpp"

#include <algorithm>
#include <cmath>

#include "minsky/errors.hpp"

namespace minsky {

std::vector<std::string> SelectionSummary::included_ids() const {
    std::vector<std::string> out;
    for (const auto& s : suppliers) {
        if (s.included) out.push_back(s.supplier_id);
    }
    return out;
}

namespace {

std::map<std::string, const FirmRecord*> index_records(
    const std::vector<FirmRecord>& records) {
    std::map<std::string, const FirmRecord*> out;
    for (const auto& r : records) out.emplace(r.firm_id, &r);
    return out;
}

const FirmRecord* lookup(const std::map<std::string, const FirmRecord*>& index,
                         const std::string& id) {
    auto it = index.find(id);
    return it == index.end() ? nullptr : it->second;
}

}  // namespace

SelectionSummary select_suppliers(const std::vector<FirmRecord>& year_t,
                                  const std::vector<FirmRecord>& year_t1,
                                  const TradeNetwork& net,
                                  const std::optional<std::string>& sector_filter) {
    SelectionSummary summary;
    const auto index_t = index_records(year_t);
    const auto index_t1 = index_records(year_t1);
    for (std::size_t i = 0; i < net.node_count(); ++i) {
        const int idx = static_cast<int>(i);
        const auto& weights = net.in_weights(idx);
        if (weights.empty()) continue;  // not a supplier in this network
        SupplierSelection sel;
        sel.supplier_id = net.id_of(idx);
        double invoice_total = 0.0;
        for (double w : weights) invoice_total += w;

        const FirmRecord* rec_t = lookup(index_t, sel.supplier_id);
        const FirmRecord* rec_t1 = lookup(index_t1, sel.supplier_id);
        if (rec_t == nullptr || rec_t1 == nullptr) {
            sel.exclusion_reason = "disappeared";
            ++summary.excluded_disappeared;
            summary.suppliers.push_back(std::move(sel));
            continue;
        }
        const bool sales_ok = rec_t->sales && *rec_t->sales > 0.0 &&
                              rec_t1->sales && *rec_t1->sales > 0.0;
        if (!sales_ok) {
            sel.exclusion_reason = "coverage";
            ++summary.excluded_coverage;
            summary.suppliers.push_back(std::move(sel));
            continue;
        }
        sel.coverage = invoice_total / *rec_t->sales;
        sel.coverage_next = invoice_total / *rec_t1->sales;
        const bool covered = sel.coverage >= 0.5 && sel.coverage <= 1.2 &&
                             sel.coverage_next >= 0.5 && sel.coverage_next <= 1.2;
        if (!covered) {
            sel.exclusion_reason = "coverage";
            ++summary.excluded_coverage;
            summary.suppliers.push_back(std::move(sel));
            continue;
        }
        if (sector_filter && rec_t->sector != *sector_filter) {
            sel.exclusion_reason = "sector";
            ++summary.excluded_sector;
            summary.suppliers.push_back(std::move(sel));
            continue;
        }
        sel.included = true;
        summary.suppliers.push_back(std::move(sel));
    }
    return summary;
}

double estimated_growth(const TradeNetwork& net,
                        const std::map<std::string, double>& purchases_t,
                        const std::map<std::string, double>& purchases_t1,
                        const std::string& supplier, bool normalize,
                        int* n_skipped_buyers) {
    const int idx = net.index_of(supplier);
    const auto& buyers = net.in_neighbors(idx);
    const auto& weights = net.in_weights(idx);
    double weighted_sum = 0.0;
    double weight_total = 0.0;
    int eligible = 0;
    int skipped = 0;
    for (std::size_t k = 0; k < buyers.size(); ++k) {
        const std::string& buyer = net.id_of(buyers[k]);
        const auto it_t = purchases_t.find(buyer);
        const auto it_t1 = purchases_t1.find(buyer);
        if (it_t == purchases_t.end() || it_t1 == purchases_t1.end() ||
            !(it_t->second > 0.0)) {
            ++skipped;
            continue;
        }
        const double growth = it_t1->second / it_t->second;
        weighted_sum += weights[k] * growth;
        weight_total += weights[k];
        ++eligible;
    }
    if (n_skipped_buyers) *n_skipped_buyers = skipped;
    if (eligible == 0) {
        throw ValidationError("estimated_growth: supplier '" + supplier +
                              "' has no buyer with usable prior purchases");
    }
    return normalize ? weighted_sum / weight_total : weighted_sum;
}

double realized_growth(const FirmRecord& record_t, const FirmRecord& record_t1) {
    if (!record_t.sales) {
        throw MissingFieldError(record_t.firm_id, record_t.year, "sales");
    }
    if (!record_t1.sales) {
        throw MissingFieldError(record_t1.firm_id, record_t1.year, "sales");
    }
    if (!(*record_t.sales > 0.0)) {
        throw ValidationError("realized_growth: zero prior sales for '" +
                              record_t.firm_id + "'");
    }
    return *record_t1.sales / *record_t.sales;
}

bool StatusFilter::matches(MinskyStatus s) const {
    switch (kind) {
        case Kind::Exact: return s == status;
        case Kind::NotHedge: return s != MinskyStatus::Hedge;
        case Kind::Any: return true;
    }
    return false;
}

FitResult fit_growth_correlation(const std::vector<GrowthPair>& pairs,
                                 const StatusFilter& from, const StatusFilter& to) {
    std::vector<double> lx, ly;
    int excluded = 0;
    for (const auto& p : pairs) {
        if (!from.matches(p.status_from) || !to.matches(p.status_to)) continue;
        if (!(p.estimated > 0.0) || !(p.realized > 0.0)) {
            ++excluded;
            continue;
        }
        lx.push_back(std::log(p.estimated));
        ly.push_back(std::log(p.realized));
    }
    if (lx.size() < 3) {
        throw ValidationError("fit_growth_correlation: fewer than 3 pairs in group");
    }
    const OlsFit f = ols(lx, ly);
    FitResult out;
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.r_squared = f.r_squared;
    out.n_points = static_cast<int>(lx.size());
    out.n_excluded = excluded;
    return out;
}

TransitionHistogram transition_histogram(
    const std::vector<std::pair<double, bool>>& ratios, double bin_width) {
    if (!(bin_width > 0.0) || bin_width > 1.0) {
        throw ValidationError("bin_width must lie in (0, 1]");
    }
    if (ratios.empty()) {
        throw ValidationError("transition_histogram: empty input");
    }
    const int n_bins = static_cast<int>(std::ceil(1.0 / bin_width - 1e-12));
    TransitionHistogram h;
    h.bin_width = bin_width;
    h.stayers.assign(n_bins, 0.0);
    h.leavers.assign(n_bins, 0.0);
    for (const auto& [ratio, stayed] : ratios) {
        if (ratio < 0.0 || ratio > 1.0) {
            throw ValidationError("ponzi-buyer ratios must lie in [0,1]");
        }
        int bin = static_cast<int>(ratio / bin_width);
        bin = std::min(bin, n_bins - 1);  // ratio 1.0 lands in the last bin
        if (stayed) {
            h.stayers[bin] += 1.0;
            ++h.n_stayers;
        } else {
            h.leavers[bin] += 1.0;
            ++h.n_leavers;
        }
    }
    if (h.n_stayers > 0) {
        for (double& v : h.stayers) v /= h.n_stayers;
    }
    if (h.n_leavers > 0) {
        for (double& v : h.leavers) v /= h.n_leavers;
    }
    for (int b = 0; b < n_bins; ++b) {
        if (h.leavers[b] > h.stayers[b]) {
            h.crossing = (b + 0.5) * bin_width;
            break;
        }
    }
    return h;
}

QuadrantCounts quadrant_counts(const std::vector<GrowthPair>& pairs) {
    QuadrantCounts q;
    for (const auto& p : pairs) {
        const bool est_up = p.estimated >= 1.0;
        const bool real_up = p.realized >= 1.0;
        if (est_up && real_up) ++q.est_up_real_up;
        if (est_up && !real_up) ++q.est_up_real_down;
        if (!est_up && real_up) ++q.est_down_real_up;
        if (!est_up && !real_up) ++q.est_down_real_down;
    }
    return q;
}

}  // namespace minsky
