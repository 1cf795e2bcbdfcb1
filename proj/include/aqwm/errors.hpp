#pragma once

#include <stdexcept>
#include <string>

namespace aqwm {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an argument value was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Sequence lengths or tensor dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

// File could not be opened / read / written.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed text input; carries the 1-based row where parsing failed.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long row) : Error(msg), row_(row) {}
    long row() const { return row_; }

private:
    long row_;
};

// Malformed binary frame; carries the name of the offending field.
class CodecError : public Error {
public:
    CodecError(const std::string& msg, std::string field)
        : Error(msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// The parameter planner found no feasible point; carries the constraint
// that could not be met.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& msg, std::string binding_constraint)
        : Error(msg), binding_(std::move(binding_constraint)) {}
    const std::string& binding_constraint() const { return binding_; }

private:
    std::string binding_;
};

// Training loss became NaN/Inf; carries the epoch where it happened.
class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& msg, int epoch) : Error(msg), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

}  // namespace aqwm
