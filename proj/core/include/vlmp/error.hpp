#pragma once

#include <stdexcept>
#include <string>

namespace vlmp {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  Singular,
  Degenerate,
  Parse,
  Io,
  Config,
};

/// Single exception type thrown by the core library. The kind lets the CLI
/// map failures onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace vlmp
