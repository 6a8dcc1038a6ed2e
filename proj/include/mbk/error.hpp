#pragma once

#include <stdexcept>
#include <string>

namespace mbk {

// A caller broke a documented precondition (shape mismatch, out-of-range
// parameter, ...). The CLI maps this to exit code 2.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// center_of_mass() on an empty tuple. Callers must branch before asking for
// the mean of an empty cluster.
class EmptyClusterError : public ContractViolation {
public:
    using ContractViolation::ContractViolation;
};

// Brute-force enumeration refused because the instance exceeds its bounds.
class InstanceTooLarge : public ContractViolation {
public:
    using ContractViolation::ContractViolation;
};

// A trace lacks the records an audit needs (global costs, C-bar distances).
class MissingAuditData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be read/written or its contents could not be parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

}  // namespace detail

}  // namespace mbk
