#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/executor.hpp"
#include "shiftlab/processes.hpp"

namespace shiftlab {

/// gamma(k) = E[X_0 X_k] for k = 0..K. Values beyond K are taken as 0.
struct AutocovarianceTable {
  enum class Source { analytic, monte_carlo };

  std::vector<double> gamma;
  std::vector<double> se;  ///< zero for analytic tables
  Source source = Source::analytic;
  std::size_t replications = 0;
  /// SE of gamma(0) + 2 sum gamma(k) from per-replication products (MC only).
  double long_run_se = 0.0;

  int max_lag() const noexcept { return static_cast<int>(gamma.size()) - 1; }
  /// gamma(|k|), 0 beyond K.
  double at(long long k) const noexcept;

  static AutocovarianceTable analytic(std::vector<double> gamma);
};

std::string to_string(AutocovarianceTable::Source source);

/// Analytic values when the process supports them, else an ensemble estimate
/// from one fresh path X_1..X_{K+1} per replication. Requires K <= 4W.
AutocovarianceTable autocovariance(const Process& process, int max_lag,
                                   std::size_t replications, Seed64 seed,
                                   const Executor& executor = Executor{});

/// The ensemble estimate regardless of analytic availability.
AutocovarianceTable monte_carlo_autocovariance(const Process& process, int max_lag,
                                               std::size_t replications, Seed64 seed,
                                               const Executor& executor = Executor{});

struct LongRunVariance {
  double s2 = 0.0;
  double se = 0.0;
  double tail = 0.0;  ///< geometric extrapolation beyond K, if requested
};

/// s^2 = gamma(0) + 2 sum_{k=1}^K gamma(k) (+ tail). With `decay_ratio` rho the
/// tail 2 gamma(K) rho / (1 - rho) is added. Throws GateError
/// ("degenerate-variance") when the result is not positive.
LongRunVariance long_run_variance(const AutocovarianceTable& table,
                                  std::optional<double> decay_ratio = std::nullopt);

struct FiniteVariance {
  double direct = 0.0;         ///< n^-1 sum_{|k|<n} (n - |k|) gamma(k), authoritative
  double identity_minus = 0.0; ///< n^-1 (n s^2 - sum (n ^ |k|) gamma(k))
  double identity_plus = 0.0;  ///< the same with the sum added
  double residual_minus = 0.0;
  double residual_plus = 0.0;
  std::string reconciling_sign;  ///< "minus", "plus", "both" or "neither"
};

/// s_n^2 = n^-1 Var[S_n]; s^2 inside the identity is summed over the table.
FiniteVariance finite_n_variance(const AutocovarianceTable& table, long long n);

struct SigmaHat {
  double double_sum = 0.0;  ///< (2m)^-1 sum_{k,l=1}^m gamma(k - l)
  double identity = 0.0;    ///< (2m)^-1 (m s_m^2 - sum_{|k|<=m} (m ^ |k|) gamma(k))
  double residual = 0.0;
  double s2_m = 0.0;        ///< sum_{|k|<=m} gamma(k)
};

SigmaHat sigma_hat_m(const AutocovarianceTable& table, long long m);

/// 2 sum_{k>=1} k |gamma(k)|, the constant in |2 sigma_hat_m^2 - s_m^2| <= C / m.
double lemma_constant(const AutocovarianceTable& table);

struct VarianceReport {
  AutocovarianceTable table;
  LongRunVariance long_run;
  long long n = 0;
  long long m = 0;
  FiniteVariance finite;
  SigmaHat sigma_hat;
};

VarianceReport variance_report(const Process& process, int max_lag, long long n,
                               long long m, std::size_t replications, Seed64 seed,
                               const Executor& executor = Executor{});

/// Columns lag, gamma, se.
std::string autocovariance_csv(const AutocovarianceTable& table);

/// s_n^2 for a process: analytic table when available, else MC with the
/// given budget. Used as the default distance normalizer.
struct Normalizer {
  double value = 0.0;
  std::string source;  ///< "analytic-sn2", "mc-sn2"
};

Normalizer finite_variance_normalizer(const Process& process, long long n,
                                      std::size_t replications, Seed64 seed,
                                      const Executor& executor = Executor{});

}  // namespace shiftlab
