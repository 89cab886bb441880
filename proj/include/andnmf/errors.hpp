#pragma once

#include <stdexcept>
#include <string>

namespace andnmf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: shapes, ranges, malformed configuration. CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (e.g. SVD did not converge). CLI exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed. CLI exit code 3.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace andnmf
