// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bgh {

/// Base for every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coordinate or value outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied parameter outside its documented range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (base-32, CSV, timestamps, keys).
class ParseError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

/// Model file rejected by load(); the message names the failed check.
class LoadError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bgh
