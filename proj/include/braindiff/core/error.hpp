// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bd {

/// Root of every error thrown by the library. The CLI maps subclasses onto
/// exit codes, so each one names a failure category rather than a call site.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix extents do not match what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Values are out of their domain (negative weights, NaN, bad label...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file parsed but its content violates the on-disk schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A loss or gradient went non-finite during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bd
