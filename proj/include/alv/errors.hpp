#pragma once

#include <stdexcept>
#include <string>

namespace alv {

// Bad inputs: violated preconditions, malformed files, unknown flags.
// The CLI maps these to exit code 1.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input uses a feature outside the supported SVG subset.
class unsupported_feature_error : public validation_error {
public:
    explicit unsupported_feature_error(const std::string& msg) : validation_error(msg) {}
};

// Failures during execution (unwritable output, non-finite loss).
// The CLI maps these to exit code 2.
class runtime_failure : public std::runtime_error {
public:
    explicit runtime_failure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace alv
