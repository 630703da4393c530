#pragma once

#include <stdexcept>
#include <string>

namespace fooddet {

enum class ErrorKind {
  kValidation,
  kInsufficientData,
  kShape,
  kAlignment,
  kDomain,
  kConvergence,
  kVersion,
  kSearch,
  kFormat,
  kCorruption,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Base of every error the library throws. The kind decides the CLI exit code:
/// format, corruption and I/O problems exit with 2, everything else with 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept;

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& what) : Error(K, what) {}
};

using ValidationError = KindedError<ErrorKind::kValidation>;
using InsufficientDataError = KindedError<ErrorKind::kInsufficientData>;
using ShapeError = KindedError<ErrorKind::kShape>;
using AlignmentError = KindedError<ErrorKind::kAlignment>;
using DomainError = KindedError<ErrorKind::kDomain>;
using ConvergenceError = KindedError<ErrorKind::kConvergence>;
using VersionError = KindedError<ErrorKind::kVersion>;
using SearchError = KindedError<ErrorKind::kSearch>;
using FormatError = KindedError<ErrorKind::kFormat>;
using CorruptionError = KindedError<ErrorKind::kCorruption>;
using IoError = KindedError<ErrorKind::kIo>;

}  // namespace fooddet
