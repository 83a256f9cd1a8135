#pragma once

#include <stdexcept>
#include <string>

namespace heatenc {

// Input/config problems detected before any compute. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric cross-check exceeded its tolerance. CLI exit code 3.
class ToleranceError : public std::runtime_error {
public:
    explicit ToleranceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A hard resolution/oscillation gate was violated, or every estimate was
// rejected by a quality gate. CLI exit code 4.
class GateError : public std::runtime_error {
public:
    explicit GateError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace heatenc
