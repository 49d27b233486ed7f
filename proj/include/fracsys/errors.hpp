#pragma once

#include <stdexcept>
#include <string>

namespace fracsys {

// Bad or mismatched inputs (grid mismatch, exponent out of range, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Quantity undefined at this input (zero field in a quotient, vanishing coupling).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Profile does not decay inside the periodic box.
struct BoundaryDecayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MuOutOfRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDirectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RegionEscapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoxTooSmallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mountain-pass level violated the strict upper bound: the run is rejected.
struct ConcentrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoBubbleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fracsys
