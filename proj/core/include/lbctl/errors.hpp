#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lbctl {

// Base of every exception thrown by the library. The CLI maps each
// subclass to its own exit code (see exit_code()).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 10; }
};

class GeometryError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 11; }
};

class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 12; }
};

class ShapeError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 13; }
};

class LinearSolverError : public Error {
public:
    LinearSolverError(const std::string& what, double residual, std::size_t iterations)
        : Error(what + " (residual " + std::to_string(residual) + " after " +
                std::to_string(iterations) + " iterations)"),
          residual_(residual), iterations_(iterations) {}
    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }
    int exit_code() const noexcept override { return 14; }

private:
    double residual_;
    std::size_t iterations_;
};

class StepSizeError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 15; }
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : Error(what + " at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }
    int exit_code() const noexcept override { return 16; }

private:
    std::size_t step_;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 17; }
};

class DegenerateError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 18; }
};

class RegimeError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 19; }
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key_path, const std::string& what)
        : Error(key_path + ": " + what), key_path_(key_path) {}
    const std::string& key_path() const noexcept { return key_path_; }
    int exit_code() const noexcept override { return 2; }

private:
    std::string key_path_;
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

}  // namespace lbctl
