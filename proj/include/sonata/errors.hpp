#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sonata {

/// Invalid argument or violated precondition.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Algorithm state that can no longer be valid, e.g. a nonpositive consensus weight.
class StateCorruptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A consensus weight fell below the representable floor.
class NumericalUnderflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Random instance generation gave up after its retry budget.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every Monte-Carlo run of an experiment failed.
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Carries every violation found while validating a configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

}  // namespace sonata
