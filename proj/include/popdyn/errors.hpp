#pragma once

#include <stdexcept>
#include <string>

namespace popdyn {

/// Non-finite or otherwise unusable numeric input to a map evaluation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid argument (bad parameter bundle, horizon, control bound, budget).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was called outside its precondition (e.g. classifying an
/// equilibrium that does not exist).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace popdyn
