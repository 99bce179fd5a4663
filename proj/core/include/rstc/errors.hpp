#pragma once

#include <stdexcept>
#include <string>

namespace rstc {

// Raised when an iterate or intermediate stops being finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FormatErrorKind {
  kIo,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kChecksumMismatch,
  kMalformed,
};

/// Failure to read or write one of the binary or text file formats.
class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

}  // namespace rstc
