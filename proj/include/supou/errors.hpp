#pragma once

#include <stdexcept>
#include <string>

namespace supou {

/// Invalid user input: bad parameters, unknown kinds, malformed grids.
/// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain where an operation is defined
/// (e.g. a CGF evaluated beyond its radius of analyticity).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure did not reach its requested accuracy.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The operation is not available for this variant.
class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Request larger than the operation accepts.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

}  // namespace supou
