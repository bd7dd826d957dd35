// SPDX-License-Identifier: Apache-2.0
#ifndef DSOPT_ERRORS_HPP
#define DSOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dsopt {

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// File read/write failure (CLI exit code 4).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dsopt

#endif
