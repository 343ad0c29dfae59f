#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kho {

using cd = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// Base for all library errors; specific conditions get their own type so
// callers can distinguish them without parsing messages.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

// Raised by the scenario runner; message names the offending kick index.
struct TraceDriftError : Error {
    using Error::Error;
};
struct LeakBudgetError : Error {
    using Error::Error;
};
struct UnderResolvedError : Error {
    using Error::Error;
};

// Fock-basis oracle: tail occupation exceeded its threshold.
struct TruncationError : Error {
    using Error::Error;
};

}  // namespace kho
