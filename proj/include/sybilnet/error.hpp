#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sybilnet {

enum class ErrorKind {
  Io,
  Format,
  Consistency,
  Shape,
  Numeric,
  Parameter,
  Degenerate,
  Diverged,
  StageDependency,
  Usage,
};

std::string_view to_string(ErrorKind kind);

// Process exit status used by the CLI for each error category.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sybilnet
