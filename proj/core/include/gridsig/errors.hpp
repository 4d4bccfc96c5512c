#pragma once

#include <stdexcept>
#include <string>

namespace gridsig {

// Base class for all toolkit errors.
class GridError : public std::runtime_error {
public:
    explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

// A switch status (or a toggle of one) leaves part of the feeder without a
// path to the slack bus.
class DisconnectedStatusError : public GridError {
public:
    explicit DisconnectedStatusError(const std::string& what) : GridError(what) {}
};

// An iterative solve did not reach its tolerance within the iteration budget.
class ConvergenceError : public GridError {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : GridError(what), residual(residual), iterations(iterations) {}
    double residual;
    int iterations;
};

// A placement cannot see a transition: the restricted signature is numerically zero.
class UnobservableSignatureError : public GridError {
public:
    explicit UnobservableSignatureError(const std::string& what) : GridError(what) {}
};

// File / serialization failures, with path context.
class IoError : public GridError {
public:
    explicit IoError(const std::string& what) : GridError(what) {}
};

}  // namespace gridsig
