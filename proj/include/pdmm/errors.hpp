#pragma once

#include <stdexcept>
#include <string>

namespace pdmm {

// Invalid user-supplied parameters or configuration (CLI exit code 2).
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally malformed inputs: dimension mismatches, disconnected graphs
// where connectivity is required, inconsistent layouts.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures: singular systems, failed brackets, degenerate spectra
// (CLI exit code 3).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdmm
