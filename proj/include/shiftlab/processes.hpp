#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/innovations.hpp"

namespace shiftlab {

/// Coefficients alpha_0, alpha_1, ... of a linear filter.
struct CoefficientRule {
  enum class Kind { geometric, polynomial, explicit_list };

  Kind kind = Kind::geometric;
  double rho = 0.5;           ///< geometric: alpha_i = rho^i
  double exponent = 4.0;      ///< polynomial: alpha_i = c * max(i,1)^-a
  double scale = 1.0;         ///< polynomial constant c
  std::vector<double> values; ///< explicit: alpha_0..alpha_{L-1}

  static CoefficientRule geometric(double rho);
  static CoefficientRule polynomial(double a, double c);
  static CoefficientRule explicit_list(std::vector<double> values);

  double coefficient(std::int64_t i) const;
};

/// Post-map of a linear process. The catalog is fixed so every map has a
/// known Hoelder exponent and constant.
struct PostMap {
  enum class Kind { identity, holder, tanh };

  Kind kind = Kind::identity;
  double beta = 1.0;  ///< holder exponent in (0, 1]
  double clip = 1.0;  ///< holder clip level, or tanh saturation level

  static PostMap identity() { return {}; }
  /// sign(x)|x|^beta clipped to [-c, c].
  static PostMap holder(double beta, double c);
  /// c * tanh(x / c); Lipschitz with constant 1.
  static PostMap tanh(double c);

  double apply(double x) const noexcept;
  double holder_exponent() const noexcept;
  /// Smallest H with |f(x) - f(y)| <= H |x - y|^beta.
  double holder_constant() const noexcept;
};

struct LinearFamily {
  CoefficientRule coefficients;
  PostMap map;
};

struct DyadicFamily {
  enum class Map { cosine, indicator };
  Map map = Map::cosine;
  int bits = 53;  ///< register precision J, at most 128
};

/// X_k = (1/m) sum_{l<m} Y_{mk-l} with Y_k = f(zeta_k, ..., zeta_{k-m+1});
/// the block innovation eps_k = (zeta_{km}, ..., zeta_{(k-1)m+1}).
struct MDepBlockFamily {
  enum class Map { sum, product };
  int width = 2;
  Map map = Map::sum;
};

/// X_k = a_k X_{k-1} + b_k with i.i.d. pairs (a_k, b_k).
struct RecursionFamily {
  ScalarLaw a = ScalarLaw::constant(0.5);
  ScalarLaw b = ScalarLaw::standard_normal();
  bool independent = true;
};

/// X_k = eps_k L_k, L_k^2 = mu + sum alpha_i L_{k-i}^2 + sum beta_i X_{k-i}^2.
struct GarchFamily {
  double mu = 1.0;
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Volterra expansion with product kernel
/// a(j_1, ..., j_i) = prod_r c * rho^{j_r}, orders 1..max_order, lags 0..max_lag.
struct VolterraFamily {
  int max_order = 2;
  int max_lag = 10;
  double c = 0.5;
  double rho = 0.5;
};

using Family = std::variant<LinearFamily, DyadicFamily, MDepBlockFamily,
                            RecursionFamily, GarchFamily, VolterraFamily>;

struct ProcessSpec {
  Family family = LinearFamily{};
  ScalarLaw innovation = ScalarLaw::standard_normal();
  double moment_order = 3.0;         ///< p claimed available, > 2
  std::optional<int> window;         ///< explicit truncation window W
  double truncation_tol = 1e-8;
  double scale = 1.0;                ///< output multiplier

  std::string family_name() const;
};

struct Violation {
  std::string rule;
  std::string path;  ///< config key responsible
  std::string message;
};

/// Checks every family constraint without building anything.
std::vector<Violation> validate_process(const ProcessSpec& spec);

/// gamma_C = sum_i ||alpha_i + beta_i eps^2||_2 over i <= max(p, q).
double garch_contraction(const GarchFamily& garch, const ScalarLaw& innovation);

/// A validated process ready for simulation. Coordinates are evaluated from a
/// window of innovations theta_k = (eps_k, eps_{k-1}, ..., eps_{k-depth}),
/// each of `dimension()` components.
class Process {
 public:
  /// Throws ConfigError naming the first violated rule.
  explicit Process(ProcessSpec spec);

  const ProcessSpec& spec() const noexcept { return spec_; }
  const DistributionSpec& innovations() const noexcept { return dist_; }
  std::size_t dimension() const noexcept { return dist_.dimension(); }

  /// Truncation window W: depths beyond W have no practical influence.
  int window() const noexcept { return window_; }
  /// Forward-recursion burn-in (recursion and GARCH families), else 0.
  int burn_in() const noexcept { return burn_in_; }
  /// Deepest innovation read by evaluate(): W for shift families, the
  /// burn-in for recursive families.
  int depth() const noexcept { return depth_; }

  /// X_k = g(theta_k). `theta` points at eps_k; eps_{k-j} component c sits at
  /// theta[-j * dimension() + c].
  double evaluate(const double* theta) const;

  /// X_1..X_n from innovations for indices 1-depth()..n stored contiguously
  /// (`first` points at index 1-depth()).
  void path(const double* first, std::size_t n, double* out) const;

  /// Exact E[X_0 X_lag] for linear identity maps and for recursions with
  /// independent (a, b); empty otherwise.
  std::optional<double> analytic_autocovariance(std::int64_t lag) const;

  /// True for linear processes with the identity post-map.
  bool linear_identity() const noexcept;
  /// alpha_i of a linear process (scale included), 0 beyond the window.
  double linear_coefficient(std::int64_t i) const;

 private:
  double evaluate_linear(const LinearFamily& f, const double* theta) const;
  double evaluate_dyadic(const DyadicFamily& f, const double* theta) const;
  double evaluate_mdep(const MDepBlockFamily& f, const double* theta) const;
  double evaluate_recursion(const double* theta) const;
  double evaluate_garch(const GarchFamily& f, const double* theta) const;
  double evaluate_volterra(const VolterraFamily& f, const double* theta) const;

  ProcessSpec spec_;
  DistributionSpec dist_;
  int window_ = 0;
  int burn_in_ = 0;
  int depth_ = 0;
  std::vector<double> weights_;  ///< linear coefficients / volterra weights
  double garch_init_ = 1.0;
};

struct PathSample {
  std::vector<double> values;
  ProcessSpec spec;
  Seed64 seed;
  std::size_t n = 0;
  int burn_in = 0;
};

struct CoupledPathPair {
  PathSample base;
  PathSample swapped;
  SwapPlan plan;
};

/// Reusable buffers for hot simulation loops.
struct PathWorkspace {
  std::vector<double> innovations;
  std::vector<double> values;
};

/// Innovation stream of `process` for `seed` and stream `id`.
InnovationStream stream_for(const Process& process, Seed64 seed,
                            StreamId id = StreamId::base);

PathSample simulate(const Process& process, std::size_t n, Seed64 seed);

/// S_n = X_1 + ... + X_n, reusing `ws`.
double simulate_sum(const Process& process, std::size_t n, Seed64 seed,
                    PathWorkspace& ws);

/// Base path from (seed, base stream) and swapped path whose filter draws the
/// plan-designated depths from (seed_primed, primed stream). Both paths are
/// evaluated coordinatewise with identical arithmetic.
CoupledPathPair simulate_coupled(const Process& process, std::size_t n,
                                 const SwapPlan& plan, Seed64 seed,
                                 Seed64 seed_primed);

/// E[X_1^2] from two burn-in lengths (B and 2B) on disjoint seeds; throws
/// GateError("burn-in") when they disagree by more than 5 combined standard
/// errors. No-op for non-recursive families.
void check_burn_in(const ProcessSpec& spec, std::size_t replications, Seed64 seed);

}  // namespace shiftlab
