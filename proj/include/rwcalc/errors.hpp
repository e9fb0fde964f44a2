#pragma once

#include <stdexcept>
#include <string>

namespace rwcalc {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A query point (in time) lies beyond the data a walk, path, or table covers.
struct OutOfHorizon : Error {
    using Error::Error;
};

// A value that must sit on the current lattice (spacing dx or 2^-m) does not.
struct OffLattice : Error {
    using Error::Error;
};

// A raw coin row ran out of complete bridges before the consumer was satisfied.
struct InsufficientBridges : Error {
    using Error::Error;
};

// The lazy construction hit its raw-step cap before reaching the horizon.
struct StepBudgetExceeded : Error {
    using Error::Error;
};

// A clock value exceeds the total quadratic variation of the given martingale.
struct BeyondTotalQV : Error {
    using Error::Error;
};

// An experiment configuration fails validation.
struct InvalidConfig : Error {
    using Error::Error;
};

// Not enough rows/levels to compute the requested statistic.
struct InsufficientData : Error {
    using Error::Error;
};

// A metric that must be positive (for log-scale fitting) is not.
struct NonPositiveMetric : Error {
    using Error::Error;
};

}  // namespace rwcalc
