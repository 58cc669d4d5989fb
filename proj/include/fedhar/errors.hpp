#pragma once

#include <stdexcept>
#include <string>

namespace fedhar {

// Error taxonomy used across the library. Everything derives from Error so
// callers can catch broadly; the CLI maps each class to a nonzero exit code.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (bad hyperparameters, impossible layer chain, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Tensor/parameter shape disagreement.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Empty or insufficient data where data is required.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Raw input that cannot be parsed or mapped (unknown label, bad row).
class IngestError : public Error {
public:
    explicit IngestError(const std::string& msg) : Error(msg) {}
};

// Operation invoked in an invalid object state (e.g. untrained classifier).
class StateError : public Error {
public:
    explicit StateError(const std::string& msg) : Error(msg) {}
};

// IO / serialization failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace fedhar
