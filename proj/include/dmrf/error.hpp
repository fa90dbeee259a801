#pragma once

#include <stdexcept>
#include <string>

namespace dmrf {

/// Problems with input data: unreadable files, malformed rows, schema
/// mismatches. Mapped to exit code 2 by the CLI.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or incoherent configuration. Mapped to exit code 3 by the CLI.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dmrf
