#pragma once

#include <stdexcept>
#include <string>

namespace whmc {

/// Invalid model or run parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a mathematical function (poles, x = 0, u <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed (e.g. no sign change inside a root bracket).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a precondition that the law of the output depends on.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A functional produced a non-finite value.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace whmc
