#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/processes.hpp"

namespace shiftlab {

inline constexpr const char* kVersion = "0.1.0";

/// Exit statuses of `run`.
enum ExitCode : int {
  exit_ok = 0,
  exit_failed_check = 1,
  exit_validation = 2,
  exit_gate = 3,
  exit_underpowered = 4,
};

/// Raw `key = value` settings. Keys are dotted (`process.family`) or grouped
/// under `[section]` headers; `#` starts a comment.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class ExperimentKind {
  dependence_profile,
  variance_report,
  block_identities,
  distance_report,
  rate_sweep,
  oracle_check,
};

std::string to_string(ExperimentKind kind);

/// A config with every default resolved. `effective` lists exactly the keys
/// that apply to the chosen family and experiment.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::distance_report;
  ProcessSpec process;
  Seed64 seed{1};
  std::map<std::string, std::string> effective;

  /// Typed accessors over `effective`.
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::vector<long long> integers(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::optional<std::string> optional(const std::string& key) const;

  /// `key = value` lines in key order; hashed for the report.
  std::string echo() const;
  std::uint64_t hash() const;
};

/// Gate-class rules map to exit status 3, everything else to 2.
bool is_gate_rule(const std::string& rule);

/// Schema and model-constraint checks without running anything.
std::vector<Violation> validate(const Config& config);

/// Throws ConfigError for the first violation (or GateError for gate rules).
ExperimentConfig resolve(const Config& config);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  unsigned workers = 1;
};

struct RunOutcome {
  int exit_code = exit_ok;
  std::string summary;  ///< one human-readable line
};

/// Runs the experiment and writes report.json, config.echo, run_meta.json
/// and the experiment CSVs. Errors are caught and mapped to exit statuses.
RunOutcome run(const Config& config, const RunOptions& options);

/// Rademacher oracle at n in {4, 16, 36}; the default config of `oracle-check`.
Config oracle_config();

/// FNV-1a over bytes.
std::uint64_t fnv1a(const std::string& bytes) noexcept;

}  // namespace shiftlab
