#pragma once

#include <stdexcept>
#include <string>

namespace shiftlab {

/// Base error. Every error carries the name of the rule it enforces so the
/// runner can report it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string rule, const std::string& message)
      : std::runtime_error(rule + ": " + message), rule_(std::move(rule)) {}

  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

/// Invalid configuration or parameters (runner exit status 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A precondition gate failed on otherwise valid input (runner exit status 3),
/// e.g. a degenerate long-run variance or an infeasible block plan.
class GateError : public Error {
 public:
  using Error::Error;
};

}  // namespace shiftlab
