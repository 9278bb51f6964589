#pragma once

#include <stdexcept>
#include <string>

namespace moda {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, unparseable header, unsupported dtype).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Tensor rank or dimensions disagree with what the caller required.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Degenerate synthetic scene description.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// An instance mask selects no cell of the feature grid.
class EmptySelection : public Error {
 public:
  using Error::Error;
};

/// Invalid pipeline configuration (unknown key, out-of-range value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace moda
