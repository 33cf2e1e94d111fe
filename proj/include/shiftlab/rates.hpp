#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "shiftlab/distances.hpp"
#include "shiftlab/executor.hpp"
#include "shiftlab/processes.hpp"

namespace shiftlab {

enum class StatisticKind { kolmogorov, lq, nonuniform_max, moment_gap, tail };

std::string to_string(StatisticKind kind);
StatisticKind parse_statistic(const std::string& name);

struct RatePoint {
  double n = 0.0;
  double value = 0.0;
  double se = 0.0;     ///< half-width or standard error of `value`
  double floor = 0.0;  ///< values at or below this are noise and excluded
  bool used = true;
};

struct RateSeries {
  StatisticKind kind = StatisticKind::kolmogorov;
  std::vector<RatePoint> points;
  double p = 3.0;
  double q = 1.0;
};

/// -(min(p,3))/2 + 1 for kolmogorov, nonuniform, moment and tail statistics
/// and -q/2 for lq.
double theoretical_slope(StatisticKind kind, double p, double q);

enum class Verdict { consistent, inconsistent, underpowered };
std::string to_string(Verdict verdict);

struct RateFit {
  bool fitted = false;
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double theoretical = 0.0;
  double tolerance = 0.15;
  std::size_t used_points = 0;
  std::size_t excluded_points = 0;
  Verdict verdict = Verdict::underpowered;
};

struct FitOptions {
  double tolerance = 0.15;
  int resamples = 1000;
  double level = 0.9;
  Seed64 seed{0x5eed};
};

/// Weighted least squares of log value on log n with weights (value/se)^2
/// (unweighted when any se is 0). Points at or below their floor are
/// excluded; fewer than 4 remaining points give an underpowered verdict.
/// The CI is a bootstrap percentile interval over point resampling, widened
/// to contain the point estimate. Marks `used` on the series.
RateFit fit_rate(RateSeries& series, const FitOptions& options = {});

struct SweepOptions {
  double p = 3.0;
  double q = 1.0;
  std::vector<double> tail_xs{2.0, 3.0};
  std::size_t normalizer_replications = 20000;
};

/// One statistic per n from R standardized sums on seed derive(seed, n).
/// Floors: 3 * DKW for kolmogorov, nonuniform and tail statistics; DKW^q for
/// lq; 2 * SE for the moment gap. Throws GateError("degenerate-variance")
/// when the long-run variance is not positive.
RateSeries rate_sweep(const Process& process, StatisticKind kind,
                      const std::vector<std::size_t>& n_grid, std::size_t replications,
                      Seed64 seed, const SweepOptions& options = {},
                      const Executor& executor = Executor{});

/// Columns n, value, se, floor, used_in_fit.
std::string rate_csv(const RateSeries& series);

}  // namespace shiftlab
