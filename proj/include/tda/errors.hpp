#pragma once

#include <stdexcept>
#include <string>

namespace tda {

// Bad or missing configuration (unknown key, unparseable value). Exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems with input data (unreadable file, missing column, bad row). Exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A series is too short for the requested operation.
class InsufficientDataError : public DataError {
public:
    explicit InsufficientDataError(const std::string& msg) : DataError(msg) {}
};

// Invalid parameter value (window < 2, p < 1, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A strategy asked the backtester for data beyond its as-of date.
class LookaheadError : public std::logic_error {
public:
    explicit LookaheadError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace tda
