#pragma once

#include <map>
#include <string>
#include <vector>

#include "minsky/dynamics.hpp"
#include "minsky/estimation.hpp"
#include "minsky/firm.hpp"
#include "minsky/network.hpp"
#include "minsky/scenario.hpp"

namespace minsky::io {

struct RowError {
    int line = 0;  // 1-based, header is line 1
    std::string reason;
};

// Shared ingestion policy: rows that violate a schema or an invariant are
// rejected and listed; the whole file fails once the rejected share passes
// max_invalid_fraction.
struct IngestOptions {
    double max_invalid_fraction = 0.01;
};

struct FirmDataset {
    std::vector<FirmRecord> records;
    std::vector<RowError> row_errors;
    bool header_only = false;

    std::vector<FirmRecord> for_year(int year) const;
    std::vector<int> years() const;  // distinct, ascending
};

// Header: firm_id,year,ebit,bank_loans,ebtda,financial_costs,sales,purchases,sector
// Empty numeric cells are kept as missing values. Duplicate (firm_id, year)
// rows and negative bank_loans/financial_costs/sales/purchases are rejected.
FirmDataset read_firm_csv(const std::string& path, const IngestOptions& opts = {});
void write_firm_csv(const std::string& path, const std::vector<FirmRecord>& records);

// Header: period,rate
RateSeries read_rate_csv(const std::string& path, const IngestOptions& opts = {});
void write_rate_csv(const std::string& path, const RateSeries& series);

// Header: buyer_id,supplier_id,weight
TradeNetwork read_edge_csv(const std::string& path, const IngestOptions& opts = {});
void write_edge_csv(const std::string& path, const TradeNetwork& net);

// Header: year,n_tot,n_hedge,n_ponzi
std::vector<PopulationUpdate> read_population_csv(const std::string& path,
                                                  const IngestOptions& opts = {});
void write_population_csv(const std::string& path,
                          const std::vector<PopulationUpdate>& rows);

// Header: firm_id,status  (or classify output firm_id,year,status)
std::map<std::string, MinskyStatus> read_status_csv(const std::string& path);
void write_status_csv(const std::string& path,
                      const std::vector<std::pair<std::string, MinskyStatus>>& statuses);

// Header: t,regime,rate,loans_fraction,ponzi_density,n_tot,n_loans,n_ponzi,clamped
void write_trajectory_csv(const std::string& path,
                          const std::vector<SystemState>& trajectory,
                          const std::vector<Regime>& regimes);

// Header: round,new_failures,cumulative_failures
void write_cascade_csv(const std::string& path, const CascadeReport& report);

// Deterministic number formatting shared by all writers.
std::string format_number(double v);

}  // namespace minsky::io
