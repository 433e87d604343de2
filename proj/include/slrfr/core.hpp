#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slrfr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Error hierarchy. The CLI maps each kind onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, shapes or configuration values.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input data (files, manifests, labels).
class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Singular light-source system, e.g. a planar normal field.
class DegenerateGeometryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace slrfr
