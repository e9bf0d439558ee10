#pragma once

#include <stdexcept>
#include <string>

namespace trajk {

/// Input that violates a documented file format or a validation rule.
/// The CLI maps this to exit code 1.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure (missing file, unwritable directory).
/// The CLI maps this to exit code 2.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace trajk
