#pragma once

#include <stdexcept>

namespace siegel {

/// Input outside an operation's domain (non-positive-definite form, odd
/// weight, singular matrix, ...). The CLI maps this to exit code 2.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its tolerance. CLI exit code 3.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace siegel
