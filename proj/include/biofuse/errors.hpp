// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace biofuse {

/// Base error. Subclasses map onto the CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
    virtual const char* category() const noexcept { return "error"; }
};

/// Bad configuration: unknown keys, out-of-range parameters, invalid CLI usage.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
    const char* category() const noexcept override { return "config"; }
};

/// Bad data: malformed files, dimension mismatches, insufficient samples.
class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
    const char* category() const noexcept override { return "data"; }
};

/// Filesystem failures: missing paths, unreadable or unwritable files.
class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
    const char* category() const noexcept override { return "io"; }
};

} // namespace biofuse
