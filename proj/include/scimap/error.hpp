#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scimap {

enum class ErrorKind {
  Parse,
  Validation,
  Io,
  Format,
  Corruption,
  Transport,
  Protocol,
  Config,
  DimensionMismatch,
  UndefinedCorrelation,
  NotFound,
  Prerequisite,
  ConfigMismatch,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library. The kind drives CLI exit payloads;
/// `offset` is set for corruption errors (byte offset) and parse errors (line number).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<std::uint64_t> offset = std::nullopt)
      : std::runtime_error(message), kind_(kind), offset_(offset) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  std::optional<std::uint64_t> offset_;
};

}  // namespace scimap
