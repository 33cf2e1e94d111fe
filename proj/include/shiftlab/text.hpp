#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace shiftlab::text {

std::string trim(std::string_view s);

/// A catalog term of the form `name` or `name(arg, arg, ...)`.
struct CallTerm {
  std::string name;
  std::vector<double> args;
};

/// Parses `name(a, b)`; numeric arguments only. Throws ConfigError with rule
/// "syntax" on malformed input.
CallTerm parse_call(std::string_view s);

/// Parses a comma-separated list of reals.
std::vector<double> parse_reals(std::string_view s);

/// Parses integers; accepts ranges written `lo..hi` as list elements.
std::vector<long long> parse_integers(std::string_view s);

double parse_real(std::string_view s);
long long parse_integer(std::string_view s);
bool parse_bool(std::string_view s);

/// `%.17g`: 17 significant digits, round-trip exact for doubles.
std::string format_real(double x);

}  // namespace shiftlab::text
