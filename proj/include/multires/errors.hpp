// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace multires {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad inputs: configs, arguments, file contents. CLI exit code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerical machinery. CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DegenerateMesh : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class SubdomainMisaligned : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class LevelMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class OutOfBox : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class EmptyTrainingSet : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class DimensionMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class StoreError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NonConvergence : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingularOperator : public NumericError {
 public:
  using NumericError::NumericError;
};

class LostEllipticity : public NumericError {
 public:
  using NumericError::NumericError;
};

class DependentRepresenters : public NumericError {
 public:
  using NumericError::NumericError;
};

class UnstableEstimate : public NumericError {
 public:
  using NumericError::NumericError;
};

class AllCellsUnstable : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace multires
