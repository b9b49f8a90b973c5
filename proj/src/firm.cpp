#include "minsky/firm.hpp"

#include "minsky/errors.hpp"

namespace minsky {

const char* to_string(MinskyStatus s) {
    switch (s) {
        case MinskyStatus::Hedge: return "hedge";
        case MinskyStatus::Speculative: return "speculative";
        case MinskyStatus::Ponzi: return "ponzi";
    }
    return "?";
}

MinskyStatus status_from_string(const std::string& s) {
    if (s == "hedge") return MinskyStatus::Hedge;
    if (s == "speculative") return MinskyStatus::Speculative;
    if (s == "ponzi") return MinskyStatus::Ponzi;
    throw ValidationError("unknown status '" + s + "'");
}

namespace {

double require_field(const FirmRecord& r, const std::optional<double>& v,
                     const char* name) {
    if (!v) throw MissingFieldError(r.firm_id, r.year, name);
    return *v;
}

}  // namespace

MinskyStatus classify(const FirmRecord& r) {
    const double ebit = require_field(r, r.ebit, "ebit");
    const double bl = require_field(r, r.bank_loans, "bank_loans");
    const double ebtda = require_field(r, r.ebtda, "ebtda");
    const double fc = require_field(r, r.financial_costs, "financial_costs");
    if (ebit >= bl) return MinskyStatus::Hedge;
    if (ebtda >= fc) return MinskyStatus::Speculative;
    return MinskyStatus::Ponzi;
}

double resilience(double income, double debt) {
    if (debt <= 0.0) {
        throw ValidationError("resilience undefined for debt <= 0");
    }
    return income / debt;
}

bool ponzi_condition(double income, double debt, double rate) {
    return income - debt * rate < 0.0;
}

}  // namespace minsky
