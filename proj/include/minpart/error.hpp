#pragma once

#include <stdexcept>
#include <string>

namespace minpart {

/// Raised when a caller violates an operation's precondition.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative solve or factorization fails. `what()` carries
/// the diagnostics (iterations done, worst residual).
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a derived geometric object (e.g. a reflected candidate
/// partition) cannot be built from the computed data.
struct ConstructionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace minpart
