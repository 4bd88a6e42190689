#pragma once

#include <stdexcept>
#include <string>

namespace greenspread {

/// Invalid configuration or input validation failure. Mapped to exit code 1
/// by the CLI.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or serialization failure. Mapped to exit code 2 by the CLI.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace greenspread
