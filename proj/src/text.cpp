#include "shiftlab/text.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "shiftlab/error.hpp"

namespace shiftlab::text {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_real(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) throw ConfigError("syntax", "expected a number, got nothing");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError("syntax", "not a number: '" + t + "'");
  return v;
}

long long parse_integer(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) throw ConfigError("syntax", "expected an integer, got nothing");
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError("syntax", "not an integer: '" + t + "'");
  return v;
}

bool parse_bool(std::string_view s) {
  const std::string t = trim(s);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ConfigError("syntax", "not a boolean: '" + t + "'");
}

namespace {

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

std::vector<double> parse_reals(std::string_view s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& piece : split_commas(s)) out.push_back(parse_real(piece));
  return out;
}

std::vector<long long> parse_integers(std::string_view s) {
  std::vector<long long> out;
  if (trim(s).empty()) return out;
  for (const auto& piece : split_commas(s)) {
    const auto dots = piece.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_integer(piece));
      continue;
    }
    const long long lo = parse_integer(piece.substr(0, dots));
    const long long hi = parse_integer(piece.substr(dots + 2));
    if (hi < lo) throw ConfigError("syntax", "empty range '" + piece + "'");
    for (long long v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

CallTerm parse_call(std::string_view s) {
  const std::string t = trim(s);
  CallTerm term;
  const auto open = t.find('(');
  if (open == std::string::npos) {
    term.name = t;
  } else {
    if (t.back() != ')')
      throw ConfigError("syntax", "unbalanced parentheses in '" + t + "'");
    term.name = trim(std::string_view(t).substr(0, open));
    term.args = parse_reals(std::string_view(t).substr(open + 1, t.size() - open - 2));
  }
  if (term.name.empty()) throw ConfigError("syntax", "missing name in '" + t + "'");
  return term;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace shiftlab::text
