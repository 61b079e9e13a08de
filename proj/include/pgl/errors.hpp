#pragma once

#include <stdexcept>
#include <string>

namespace pgl {

// Thrown on contract breaches. The CLI maps these to exit code 1;
// theorem-level checks never throw, they land as verdicts in reports.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// N or a set size beyond what the bit-packed representation supports.
struct CapacityError : Error {
    using Error::Error;
};

// A documented precondition does not hold (weights out of range, eta
// outside (0,1), mismatched instance shapes, ...).
struct PreconditionError : Error {
    using Error::Error;
};

// Malformed instance file or config text.
struct FormatError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace pgl
