#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>

namespace shiftlab::numeric {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

/// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

/// Inverse standard normal CDF (Wichura, AS 241, PPND16). Relative accuracy
/// about 1e-16 on (0, 1).
double normal_quantile(double u);

/// E|Z|^q for a standard normal Z.
double gaussian_abs_moment(double q);

/// Antiderivative of Phi: x*Phi(x) + phi(x).
inline double normal_cdf_integral(double x) {
  return x * normal_cdf(x) + normal_pdf(x);
}

/// Fixed-order Gauss-Legendre rule on [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int order = 10);

/// Composite Gauss-Legendre over `pieces` equal subintervals.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int pieces = 64, int order = 10);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;  ///< weighted residual sum of squares
};

/// Weighted least squares of y on x. Empty `weights` means unit weights.
/// Requires at least two distinct x values.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> weights = {});

/// A Monte Carlo point estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Sample mean and its standard error (sample sd / sqrt(R)).
Estimate mean_estimate(std::span<const double> x);

/// (mean |x|^p)^(1/p); standard error by the delta method on the p-th
/// absolute moment. Zero SE when every sample is 0.
Estimate lp_norm_estimate(std::span<const double> x, double p);

}  // namespace shiftlab::numeric
