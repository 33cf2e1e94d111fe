#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/executor.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/processes.hpp"

namespace shiftlab {

inline constexpr double kDkwConfidence = 0.01;
inline constexpr std::size_t kMinDistanceSamples = 1000;

/// sqrt(ln(2/delta) / (2R)).
double dkw_half_width(std::size_t replications, double delta = kDkwConfidence);

/// Right-continuous step CDF: F(x) = cum[i] on [atoms[i], atoms[i+1]).
struct StepCdf {
  std::vector<double> atoms;  ///< strictly increasing
  std::vector<double> cum;    ///< P(X <= atoms[i]), last entry 1

  /// Empirical CDF of sorted samples; ties merge into one atom.
  static StepCdf from_sorted(const std::vector<double>& sorted);
  double operator()(double x) const;
  /// P(X < x)
  double left_limit(double x) const;
};

/// R realizations of S_n / sqrt(n v) with v the chosen normalizer.
struct StandardizedSampleSet {
  std::vector<double> sorted;
  double normalizer = 1.0;
  std::string normalizer_source;
  std::size_t n = 0;

  std::size_t size() const noexcept { return sorted.size(); }
};

/// Standardizes raw sums S_n (any order) by sqrt(n v).
StandardizedSampleSet standardize(std::vector<double> sums, std::size_t n, double v,
                                  std::string source);

/// Raw sums S_n of R independent paths, replication r on seed derive(seed, r).
std::vector<double> sample_sums(const Process& process, std::size_t n,
                                std::size_t replications, Seed64 seed,
                                const Executor& executor = Executor{});

struct KolmogorovResult {
  double distance = 0.0;
  double location = 0.0;  ///< atom where the sup is attained
  double dkw = 0.0;
};

/// sup_x |F(x) - Phi(x)| of a step CDF, attained at an atom or its left limit.
KolmogorovResult kolmogorov(const StepCdf& cdf);

/// Refuses R below kMinDistanceSamples.
KolmogorovResult empirical_kolmogorov(const StandardizedSampleSet& samples,
                                      double delta = kDkwConfidence);

/// Exact sup distance of the standardized Rademacher sum S_n / sqrt(n); n <= 40.
double exact_kolmogorov_rademacher(int n);
/// The atoms and CDF of S_n / sqrt(n) for Rademacher steps.
StepCdf rademacher_cdf(int n);

struct LqResult {
  double q = 1.0;
  double integral = 0.0;      ///< int |F - Phi|^q dx
  double l1 = 0.0;            ///< int |F - Phi| dx
  double sup = 0.0;           ///< Kolmogorov distance of the same CDF
  double quadrature_tol = 0.0;
  double bound = 0.0;         ///< sup^(q-1) * l1
  bool bound_holds = true;    ///< integral <= bound + quadrature_tol
  double lower = 0.0;         ///< integration range
  double upper = 0.0;
};

/// Integrates between the union of a 2049-point grid on [-8, 8] and the
/// atoms, splitting each piece where the step level crosses Phi. Ten-point
/// Gauss-Legendre per piece; the tolerance is the summed |GL10 - GL3|
/// difference plus the Gaussian mass outside the range.
LqResult lq_distance(const StepCdf& cdf, double q);
LqResult lq_distance(const StandardizedSampleSet& samples, double q);

struct NonuniformProfile {
  double p = 3.0;
  std::vector<double> x;
  std::vector<double> weighted_gap;  ///< (1 + |x|^p) |F(x) - Phi(x)|
  double max = 0.0;
  double argmax = 0.0;
};

/// Default grid: -6..6 in steps of 0.01.
std::vector<double> default_nonuniform_grid();

/// Grid must be symmetric about 0 and cover [-6, 6].
NonuniformProfile nonuniform_profile(const StandardizedSampleSet& samples, double p,
                                     const std::vector<double>& grid);

/// Catalog integrands f with f(0) = 0.
struct Functional {
  enum class Kind { power, tanh };
  Kind kind = Kind::power;
  double q = 1.0;  ///< power: |x|^q; tanh: tanh(|x|)

  static Functional power(double q) { return {Kind::power, q}; }
  static Functional hyperbolic() { return {Kind::tanh, 1.0}; }
  std::string to_string() const;
  double operator()(double x) const;
  /// E f(|Z|) for standard normal Z.
  double gaussian_value() const;
};

struct FunctionalGap {
  double sample_mean = 0.0;
  double sample_se = 0.0;
  double gaussian = 0.0;
  double gap = 0.0;         ///< |sample_mean - gaussian|
  double signed_gap = 0.0;
};

/// Refuses power q >= p.
FunctionalGap functional_gap(const StandardizedSampleSet& samples, const Functional& f,
                             double p);

struct TailRow {
  double x = 0.0;
  double probability = 0.0;
  double se = 0.0;
  double gaussian = 0.0;  ///< 2 (1 - Phi(x))
};

struct TailTable {
  std::vector<TailRow> rows;
  std::optional<double> log_slope;  ///< slope of log P on log x (>= 3 positive x)
};

TailTable tail_probability(const StandardizedSampleSet& samples, const std::vector<double>& xs);

struct DistanceReport {
  std::size_t n = 0;
  std::size_t replications = 0;
  std::string normalizer_source;
  double normalizer = 0.0;
  KolmogorovResult kolmogorov;
  LqResult lq;
  NonuniformProfile nonuniform;
  std::vector<std::pair<double, FunctionalGap>> moment_gaps;  ///< keyed by q
  TailTable tails;
};

struct DistanceOptions {
  double p = 3.0;
  double q = 2.0;
  std::vector<double> moment_qs{1.0, 2.0};
  std::vector<double> tail_xs{0.0, 1.0, 2.0, 3.0, 4.0};
};

DistanceReport distance_report(const StandardizedSampleSet& samples,
                               const DistanceOptions& options);

std::string nonuniform_csv(const NonuniformProfile& profile);
std::string tail_csv(const TailTable& table);

}  // namespace shiftlab
