#include "sybilnet/error.hpp"

namespace sybilnet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Degenerate: return "degenerate-embedding";
    case ErrorKind::Diverged: return "diverged-training";
    case ErrorKind::StageDependency: return "stage dependency";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return 2;
    case ErrorKind::StageDependency: return 3;
    case ErrorKind::Io: return 4;
    case ErrorKind::Format: return 5;
    case ErrorKind::Consistency: return 6;
    case ErrorKind::Shape:
    case ErrorKind::Numeric:
    case ErrorKind::Diverged:
    case ErrorKind::Degenerate: return 7;
    case ErrorKind::Parameter: return 8;
  }
  return 1;
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

}  // namespace sybilnet
