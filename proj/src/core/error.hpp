#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radarcal {

/// Reason codes carried by every exception the core throws.
enum class Errc {
  bad_magic,
  truncated,
  trailing_data,
  non_finite,
  bad_dimensions,
  bad_header,
  parse,
  missing_index,
  duplicate_index,
  length_mismatch,
  out_of_range,
  degenerate_training,
  insufficient_data,
  undefined_correlation,
  malformed,
  version_mismatch,
  gain_not_positive,
  io,
};

enum class ErrorCategory { validation, io };

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept {
    return code_ == Errc::io ? ErrorCategory::io : ErrorCategory::validation;
  }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace radarcal
