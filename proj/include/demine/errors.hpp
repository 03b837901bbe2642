#pragma once

#include <stdexcept>
#include <string>

namespace demine {

// Bad shapes, out-of-range arguments, malformed files.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Mathematically undefined request (e.g. a non-positive log argument).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Optimization produced a non-finite loss, gradient or objective.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace demine
