#pragma once

#include <stdexcept>
#include <string>

namespace loadcast {

/// Base class for every error raised by the library. Each error carries the
/// name of the module that raised it so the CLI can report its origin.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string kind, const std::string& message)
        : std::runtime_error(message), module_(std::move(module)), kind_(std::move(kind)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string module_;
    std::string kind_;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    DomainError(std::string module, const std::string& message)
        : Error(std::move(module), "domain error", message) {}
};

class InsufficientDataError : public Error {
public:
    InsufficientDataError(std::string module, const std::string& message)
        : Error(std::move(module), "insufficient data", message) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error("diff-engine", "shape mismatch", message) {}
};

/// A loss, activation or gradient became non-finite.
class DivergenceError : public Error {
public:
    DivergenceError(std::string module, const std::string& message)
        : Error(std::move(module), "divergence", message) {}
};

/// Malformed or inconsistent user input (CSV rows, config values, files).
class InputError : public Error {
public:
    InputError(std::string module, const std::string& message)
        : Error(std::move(module), "invalid input", message) {}
};

/// Hours missing from a series that cannot be explained by a DST switch.
class GapError : public Error {
public:
    explicit GapError(const std::string& message) : Error("pipeline", "gap report", message) {}
};

class GridMismatchError : public Error {
public:
    explicit GridMismatchError(const std::string& message)
        : Error("scale-aggregate", "grid mismatch", message) {}
};

class UnstableMetricError : public Error {
public:
    explicit UnstableMetricError(const std::string& message)
        : Error("eval-metrics", "unstable metric", message) {}
};

}  // namespace loadcast
