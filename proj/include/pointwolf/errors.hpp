#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pointwolf {

// Precondition violations on operation arguments are reported with
// std::invalid_argument. The types below cover data-dependent failures.

/// Input data is structurally valid but unusable (empty cloud, NaN coordinate, ...).
class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public InvalidInput {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : InvalidInput(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a confidence oracle throws or returns a value outside [0, 1].
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pointwolf
