#pragma once

#include <stdexcept>
#include <string>

namespace banditpack {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A kernel row of a tabular arm deviates from a probability vector by more
// than the validation tolerance.
struct NonStochasticRow : Error {
    using Error::Error;
};

struct NegativeReward : Error {
    using Error::Error;
};

// Invalid parameter domain (nonpositive prior pseudo-counts, bad indices, ...).
struct DomainError : Error {
    using Error::Error;
};

// Budget k outside [1, n].
struct InvalidBudget : Error {
    using Error::Error;
};

// No positive Beta prior scale parameter reaches the requested coefficient
// of variation for the given shape parameter.
struct InfeasibleCV : Error {
    using Error::Error;
};

// Exact joint-state solve refused: instance exceeds the configured caps.
struct InstanceTooLarge : Error {
    using Error::Error;
};

}  // namespace banditpack
