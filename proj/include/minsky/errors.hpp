#pragma once

#include <stdexcept>
#include <string>

namespace minsky {

// Bad inputs or violated preconditions. The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failures: non-convergence, undefined results. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A classification or growth computation needed a field the record does not carry.
class MissingFieldError : public ValidationError {
public:
    MissingFieldError(const std::string& firm_id, int year, const std::string& field)
        : ValidationError("record " + firm_id + "/" + std::to_string(year) +
                          ": missing field '" + field + "'"),
          field_(field) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// The failure density sits at or above the critical density: the closed-form
// expected failure count diverges.
class SupercriticalError : public NumericError {
public:
    SupercriticalError(double density, double critical)
        : NumericError("density " + std::to_string(density) +
                       " at or above critical density " + std::to_string(critical)),
          density_(density),
          critical_(critical) {}

    double density() const { return density_; }
    double critical() const { return critical_; }

private:
    double density_;
    double critical_;
};

}  // namespace minsky
