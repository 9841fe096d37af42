#pragma once

#include <stdexcept>
#include <string>

namespace wmbench {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violation by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (parse errors, missing files, wrong layout).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Stored data disagrees with itself (checksum or replay mismatch).
class IntegrityError : public Error {
 public:
  IntegrityError(const std::string& what, long first_bad_frame)
      : Error(what), first_bad_frame_(first_bad_frame) {}
  long first_bad_frame() const noexcept { return first_bad_frame_; }

 private:
  long first_bad_frame_;
};

/// Numerical degeneracy (e.g. collinear point sets handed to an aligner).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace wmbench
