#pragma once

#include <stdexcept>
#include <string>

namespace fepl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (map files, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling gave up; the map has (almost) no free space.
class SamplingExhausted : public Error {
 public:
  using Error::Error;
};

/// Vectors or scans of the wrong length.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Binary file problems: bad magic/version, checksum, truncation.
class FormatError : public Error {
 public:
  enum class Kind { kVersionMismatch, kChecksumMismatch, kTruncated, kCorrupt };
  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A gradient step or training loss became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unknown configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fepl
