#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/executor.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/processes.hpp"

namespace shiftlab {

/// n = 2(N-1)m + m' with c0 m <= m' <= m.
struct BlockPlan {
  long long n = 0;
  long long m = 0;
  long long N = 0;
  long long m_prime = 0;
  double c0 = 0.5;
  std::optional<double> lambda;  ///< set for rate-driven plans, N = floor(n^lambda)
};

/// Largest N whose m' lands in [c0 m, m]. Throws ConfigError for n <= 2m or
/// c0 outside (0, 1] and GateError("block-plan-infeasible") when no N works.
BlockPlan make_plan(long long n, long long m, double c0);

/// N = floor(n^lambda) and the smallest m that satisfies the identity.
/// Throws ConfigError("lambda-range") unless 0 < lambda <= p/(2p+2).
BlockPlan make_rate_plan(long long n, double p, double lambda, double c0);

/// Violations of the plan constraints, without throwing.
std::vector<Violation> validate_plan(long long n, long long m, double c0);
std::vector<Violation> validate_lambda(double lambda, double p);

/// One path split into its m-dependent approximant and residual.
struct ApproxPair {
  std::vector<double> x;
  std::vector<double> approx;    ///< estimate of E[X_k | eps_k, ..., eps_{k-m+1}]
  std::vector<double> residual;  ///< x - approx, exactly
  /// per-coordinate variance of the conditional-MC average (0 when exact)
  std::vector<double> noise_var;
  int m = 0;
  int redraws = 0;
  bool exact = false;
};

/// Conditional Monte Carlo over T redraws of the innovations at depths >= m.
/// Linear identity processes use the exact truncated filter unless
/// `force_monte_carlo` is set.
ApproxPair m_approx(const Process& process, std::size_t n, int m, int redraws,
                    Seed64 seed, bool force_monte_carlo = false);

struct ResidualNorm {
  numeric::Estimate raw;        ///< ||X_k - Xhat_k^(<=m)||_p
  numeric::Estimate corrected;  ///< p = 2 only: redraw noise removed
  numeric::Estimate bound;      ///< m^-2 sum_{l>=m} l^2 delta_p(l), if supplied
};

/// ||X_1^(>m)||_p over R replications of a single coordinate.
ResidualNorm residual_norm(const Process& process, int m, double p, int redraws,
                           std::size_t replications, Seed64 seed,
                           bool force_monte_carlo = false,
                           const Executor& executor = Executor{});

struct ApproximationError {
  numeric::Estimate scaled_norm;  ///< n^-1/2 ||S_n - S_n^(<=m)||_p
  numeric::Estimate tail_probability;  ///< P(|S_n - S_n^(<=m)| >= delta s_n sqrt(n))
  double delta = 0.0;
  double reference = 0.0;  ///< (delta n)^-p, the scaling the tail bound predicts
};

ApproximationError approximation_error(const Process& process, std::size_t n, int m,
                                       double p, std::size_t replications, int redraws,
                                       Seed64 seed, double delta, double s2_n,
                                       const Executor& executor = Executor{});

/// Ensemble of block decompositions under the interleaved conditioning.
struct BlockDecomposition {
  BlockPlan plan;
  std::size_t replications = 0;
  int redraws = 0;

  numeric::Estimate s2_nm;          ///< n^-1 E[S_n^2]
  numeric::Estimate sigma_bar2;     ///< E[sigma_|m^2], sigma_|m^2 = n^-1 E_F[(S^(1))^2]
  numeric::Estimate varsigma_bar2;  ///< n^-1 E[(S^(2))^2], redraw noise removed
  numeric::Estimate residual;       ///< s2_nm - sigma_bar2 - varsigma_bar2, paired
  std::vector<numeric::Estimate> sigma_j2;  ///< E[sigma_{j|m}^2] per block
  /// sigma_{j|m}^2 per replication, block-major: [j * R + r]
  std::vector<double> sigma_jm2;
  double max_additivity_error = 0.0;  ///< S_n vs S1 + S2 and S1 vs sum_j Y_j
  double adjacent_correlation = 0.0;  ///< Y_1 vs Y_2 across redraws, pooled
};

/// Requires an m-dependent process at plan.m: its filter depth must stay
/// below m, or, for linear identity filters, ||X^(>m)||_2 <= 1e-6.
/// Throws GateError("not-m-dependent") otherwise.
BlockDecomposition decompose(const Process& process, const BlockPlan& plan,
                             std::size_t replications, int redraws, Seed64 seed,
                             const Executor& executor = Executor{});

/// Whether the innovation at `index` is free (not fixed) under F_m.
bool free_under_conditioning(long long index, long long m) noexcept;

/// Columns j, sigma_j2, se.
std::string block_variance_csv(const BlockDecomposition& d);

}  // namespace shiftlab
