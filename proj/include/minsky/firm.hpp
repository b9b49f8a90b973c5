#pragma once

#include <optional>
#include <string>

namespace minsky {

enum class MinskyStatus { Hedge, Speculative, Ponzi };

const char* to_string(MinskyStatus s);
MinskyStatus status_from_string(const std::string& s);

// One firm-year of balance-sheet aggregates. Empty CSV cells stay unset;
// operations that need a field demand it explicitly and never default it.
// Earnings fields (ebit, ebtda) may be negative; the rest must be >= 0.
struct FirmRecord {
    std::string firm_id;
    int year = 0;
    std::optional<double> ebit;
    std::optional<double> bank_loans;
    std::optional<double> ebtda;
    std::optional<double> financial_costs;
    std::optional<double> sales;
    std::optional<double> purchases;
    std::string sector;
};

// Three-way decision, in order:
//   Hedge       iff ebit >= bank_loans
//   Speculative iff ebtda >= financial_costs (and not Hedge)
//   Ponzi       otherwise
// Boundary ties are inclusive on the first two tests; Ponzi is the strict residual.
MinskyStatus classify(const FirmRecord& r);

// income/debt; the firm's tolerance to interest-rate levels. debt must be > 0.
double resilience(double income, double debt);

// True iff income no longer covers the interest bill: income - debt * rate < 0.
// rate is a plain fraction per year here, not percent.
bool ponzi_condition(double income, double debt, double rate);

}  // namespace minsky
