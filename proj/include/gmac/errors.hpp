#pragma once

#include <stdexcept>
#include <string>

namespace gmac {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveVariance : Error {
    using Error::Error;
};
struct DegenerateCorrelation : Error {
    using Error::Error;
};
struct MismatchedNoise : Error {
    using Error::Error;
};
struct OutOfDomain : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};
struct ZeroInput : Error {
    using Error::Error;
};
struct SingularK : Error {
    using Error::Error;
};
struct InfeasibleAlpha : Error {
    using Error::Error;
};
struct BudgetExceeded : Error {
    using Error::Error;
};
struct NoSignChange : Error {
    using Error::Error;
};
struct EmptyFeasible : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace gmac
