#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nots {

/// Shape or size mismatch between objects that must agree.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter outside its admissible range.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver failed to reach tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Malformed dataset file; offset is the byte position where reading failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Factorization failure or divergence.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double condition_estimate = 0.0)
        : std::runtime_error(what), condition_(condition_estimate) {}
    double condition_estimate() const { return condition_; }

private:
    double condition_;
};

}  // namespace nots
