#pragma once

#include <stdexcept>
#include <string>

namespace wcpd {

/// A parameter lies outside the documented range of an operation (w, q, sigma, ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data violates a structural precondition (empty measure, size mismatch, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable file content. Carries the offending line when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_{line} {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stochastic integration left the stable region; usually the step is too large.
class SimulationDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wcpd
