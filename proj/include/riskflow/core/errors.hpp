#pragma once

#include <stdexcept>
#include <string>

namespace riskflow {

/// Category of a failure; the CLI renders it together with the module that raised it.
enum class ErrorKind {
    configuration,
    evaluation,
    simulation,
    statistics,
    solver,
    numeric,
    usage,
};

const char* to_string(ErrorKind kind) noexcept;

/**
 * @brief Base exception for every failure raised by the library.
 *
 * Carries the error category and the name of the module that detected it so
 * command-line front ends can report provenance without parsing messages.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

class ConfigurationError : public Error {
public:
    ConfigurationError(std::string module, const std::string& message)
        : Error(ErrorKind::configuration, std::move(module), message) {}
};

class EvaluationError : public Error {
public:
    EvaluationError(std::string module, const std::string& message)
        : Error(ErrorKind::evaluation, std::move(module), message) {}
};

class SimulationError : public Error {
public:
    SimulationError(std::string module, const std::string& message)
        : Error(ErrorKind::simulation, std::move(module), message) {}
};

class StatisticsError : public Error {
public:
    StatisticsError(std::string module, const std::string& message)
        : Error(ErrorKind::statistics, std::move(module), message) {}
};

class SolverError : public Error {
public:
    SolverError(std::string module, const std::string& message)
        : Error(ErrorKind::solver, std::move(module), message) {}
};

class NumericError : public Error {
public:
    NumericError(std::string module, const std::string& message)
        : Error(ErrorKind::numeric, std::move(module), message) {}
};

class UsageError : public Error {
public:
    UsageError(std::string module, const std::string& message)
        : Error(ErrorKind::usage, std::move(module), message) {}
};

}  // namespace riskflow
