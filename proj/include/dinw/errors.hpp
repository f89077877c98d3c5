#pragma once

#include <stdexcept>
#include <string>

namespace dinw {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Contract violation on tensor/frame shapes. Messages name both shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Odd-height input, same-parity weave, and similar field-parity misuse.
class ParityError : public Error {
public:
    using Error::Error;
};

// An operation produced NaN or Inf from finite inputs.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Weights/checkpoint loading failures, distinguishable by kind.
class WeightsError : public Error {
public:
    enum class Kind { NotAWeightsFile, VersionMismatch, ShapeMismatch, Truncated, MissingOptimizerState };

    WeightsError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace dinw
