#pragma once

#include <stdexcept>
#include <string>

namespace thermolab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A point left the open disk, usually a corrupted transform.
struct DomainError : Error {
    using Error::Error;
};

// Fundamental-domain reduction did not terminate within the move budget.
struct ReductionError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    explicit SchemaError(std::string field, const std::string& msg)
        : Error(field.empty() ? msg : field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

// Slope-dependent measurement requested on a flow that failed certification.
struct CertificationError : Error {
    using Error::Error;
};

struct NumericalFault : Error {
    using Error::Error;
};

}  // namespace thermolab
