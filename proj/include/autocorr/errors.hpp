#pragma once

#include <stdexcept>
#include <string>

namespace autocorr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid shapes do not fit the operation (mismatch, target too small, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A normalization or kernel refresh met a grid with no positive mass.
class ZeroMassError : public Error {
 public:
  using Error::Error;
};

class InvalidParamError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside the domain of a functional (negative densities, empty q).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The reference signal of an SNR has zero energy.
class DegenerateSignalError : public Error {
 public:
  using Error::Error;
};

/// An iteration produced non-finite values.
class DivergedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raster file whose header or payload does not match the format.
class MalformedFileError : public IoError {
 public:
  MalformedFileError(const std::string& what, std::size_t offset)
      : IoError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace autocorr
