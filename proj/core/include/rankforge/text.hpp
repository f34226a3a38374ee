#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rankforge {

/// Shortest decimal text that parses back to exactly `value`; "inf"/"-inf"
/// for infinities.
std::string format_double(double value);

/// Full-string decimal parse accepting an optional leading '+' and "inf".
/// Throws Error(parse) with `what` in the message on failure.
double parse_double(std::string_view text, std::string_view what = "number");
long long parse_integer(std::string_view text, std::string_view what = "integer");

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace rankforge
