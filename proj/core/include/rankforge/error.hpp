#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rankforge {

/// Category of a failure. The service maps these onto HTTP status classes and
/// the CLI prints them as the leading token of its one-line diagnostic.
enum class ErrorCode {
  schema,         // malformed or incomplete input shape (missing column, unknown id)
  validation,     // well-formed input that violates a declared constraint
  bounds,         // score outside [score_min, score_max]
  contract,       // caller broke a precondition between library calls
  capacity,       // scenario product exceeds the cap
  domain,         // value outside an attribute domain
  no_baseline,    // relative change requested without a previous-year value
  training,       // not enough rows to fit an indicator
  parse,          // malformed JSON / CSV text
  version,        // persisted document from an incompatible version
  not_found,
  conflict,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. `location()` is a
/// free-form pointer into the offending input ("row 12, column ind_SFRI",
/// "byte 311", "filter[2]") and is empty when there is nothing to point at.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string location = {})
      : std::runtime_error(message), code_(code), location_(std::move(location)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& location() const noexcept { return location_; }

  /// "<code>: <message> (at <location>)"
  std::string describe() const;

 private:
  ErrorCode code_;
  std::string location_;
};

/// Carries the product that overflowed so callers can report it.
class CapacityError : public Error {
 public:
  CapacityError(unsigned long long requested, unsigned long long cap);

  unsigned long long requested() const noexcept { return requested_; }
  unsigned long long cap() const noexcept { return cap_; }

 private:
  unsigned long long requested_;
  unsigned long long cap_;
};

}  // namespace rankforge
