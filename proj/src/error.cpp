#include "scimap/error.hpp"

namespace scimap {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Corruption: return "corruption";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::Config: return "config";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Prerequisite: return "prerequisite";
    case ErrorKind::ConfigMismatch: return "config-mismatch";
  }
  return "unknown";
}

}  // namespace scimap
