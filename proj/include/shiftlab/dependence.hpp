#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/executor.hpp"
#include "shiftlab/processes.hpp"

namespace shiftlab {

/// Monte Carlo estimates of delta_p(l) = ||X_k - X_k^(l,')||_p at fixed k.
struct DependenceProfile {
  std::vector<int> lags;
  std::vector<double> delta_hat;
  std::vector<double> se;
  /// sum over profiled lags l <= L of l^2 * delta_hat(l)
  std::vector<double> weighted_partial;
  double p = 2.0;
  std::size_t replications = 0;

  /// Builds a profile from known values (zero SE), e.g. for fit checks.
  static DependenceProfile from_values(std::vector<int> lags, std::vector<double> delta,
                                       double p = 2.0);
};

/// Requires R >= 100, p <= the process moment order and lags in [0, W],
/// strictly increasing.
DependenceProfile dependence_profile(const Process& process, double p,
                                     const std::vector<int>& lags,
                                     std::size_t replications, Seed64 seed,
                                     const Executor& executor = Executor{});

struct DecayFit {
  enum class Kind { geometric, polynomial };
  Kind kind = Kind::geometric;
  double parameter = 0.0;  ///< rho for geometric, exponent a for polynomial
  double log_scale = 0.0;  ///< fitted log C
  double goodness = 0.0;   ///< residual sum of squares of the chosen fit
  double geometric_rss = 0.0;
  double polynomial_rss = 0.0;
  std::size_t points = 0;
  int last_lag = 0;
  /// sum_{l > last_lag} l^2 C g(l) under the fitted class; +inf when divergent
  double extrapolated_tail = 0.0;
};

/// Log-linear fits against l and log l; geometric wins unless its RSS exceeds
/// the polynomial one by more than 10%. Needs 5 positive values at lags >= 1.
DecayFit decay_fit(const DependenceProfile& profile);

enum class Summability { summable, not_summable, inconclusive };

std::string to_string(Summability verdict);
std::string to_string(DecayFit::Kind kind);

struct SummabilityReport {
  Summability verdict = Summability::inconclusive;
  double partial_sum = 0.0;  ///< sum over profiled lags of l^2 delta_hat(l)
  double tail = 0.0;         ///< extrapolated remainder
};

/// `fit` may be empty when the profile has too few positive values; an
/// all-zero profile is summable with tail 0.
SummabilityReport summability_report(const DependenceProfile& profile,
                                     const std::optional<DecayFit>& fit);

/// Columns lag, delta_hat, se, weighted_partial_sum.
std::string profile_csv(const DependenceProfile& profile);

}  // namespace shiftlab
