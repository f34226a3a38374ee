#include "rankforge/error.hpp"

namespace rankforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::schema: return "schema";
    case ErrorCode::validation: return "validation";
    case ErrorCode::bounds: return "bounds";
    case ErrorCode::contract: return "contract";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::domain: return "domain";
    case ErrorCode::no_baseline: return "no_baseline";
    case ErrorCode::training: return "training";
    case ErrorCode::parse: return "parse";
    case ErrorCode::version: return "version";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

std::string Error::describe() const {
  std::string out{to_string(code_)};
  out += ": ";
  out += what();
  if (!location_.empty()) {
    out += " (at ";
    out += location_;
    out += ')';
  }
  return out;
}

CapacityError::CapacityError(unsigned long long requested, unsigned long long cap)
    : Error(ErrorCode::capacity,
            "scenario product " + std::to_string(requested) + " exceeds cap " +
                std::to_string(cap)),
      requested_(requested),
      cap_(cap) {}

}  // namespace rankforge
