#include "fooddet/error.hpp"

namespace fooddet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kInsufficientData: return "insufficient data";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kAlignment: return "alignment error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kConvergence: return "convergence error";
    case ErrorKind::kVersion: return "version error";
    case ErrorKind::kSearch: return "search error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kCorruption: return "corruption error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

int Error::exit_code() const noexcept {
  switch (kind_) {
    case ErrorKind::kFormat:
    case ErrorKind::kCorruption:
    case ErrorKind::kIo:
      return 2;
    default:
      return 1;
  }
}

}  // namespace fooddet
