#include "shiftlab/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shiftlab/error.hpp"
#include "shiftlab/text.hpp"

namespace shiftlab {

std::vector<Violation> validate_plan(long long n, long long m, double c0) {
  std::vector<Violation> out;
  if (m < 1) {
    out.push_back({"block-length", "blocks.m", "m must be >= 1"});
    return out;
  }
  if (!(c0 > 0.0 && c0 <= 1.0))
    out.push_back({"block-fraction", "blocks.c0", "c0 must lie in (0, 1]"});
  if (n <= 2 * m)
    out.push_back({"block-length", "blocks.n", "need n > 2m, got n = " + std::to_string(n) +
                                                   ", m = " + std::to_string(m)});
  if (!out.empty()) return out;
  for (long long N = n / (2 * m) + 1; N >= 2; --N) {
    const long long mp = n - 2 * (N - 1) * m;
    if (mp >= c0 * static_cast<double>(m) && mp <= m) return out;
  }
  out.push_back({"block-plan-infeasible", "blocks.n",
                 "no N gives m' = n - 2(N-1)m inside [c0 m, m] = [" +
                     text::format_real(c0 * static_cast<double>(m)) + ", " +
                     std::to_string(m) + "] for n = " + std::to_string(n)});
  return out;
}

std::vector<Violation> validate_lambda(double lambda, double p) {
  std::vector<Violation> out;
  const double cap = p / (2.0 * p + 2.0);
  if (!(lambda > 0.0 && lambda <= cap))
    out.push_back({"lambda-range", "blocks.lambda",
                   "lambda = " + text::format_real(lambda) + " must lie in (0, p/(2p+2)] = (0, " +
                       text::format_real(cap) + "]"});
  return out;
}

namespace {

[[noreturn]] void raise(const Violation& v) {
  const std::string msg = v.path + ": " + v.message;
  if (v.rule == "block-plan-infeasible") throw GateError(v.rule, msg);
  throw ConfigError(v.rule, msg);
}

}  // namespace

BlockPlan make_plan(long long n, long long m, double c0) {
  const auto violations = validate_plan(n, m, c0);
  if (!violations.empty()) raise(violations.front());
  BlockPlan plan;
  plan.n = n;
  plan.m = m;
  plan.c0 = c0;
  for (long long N = n / (2 * m) + 1; N >= 2; --N) {
    const long long mp = n - 2 * (N - 1) * m;
    if (mp >= c0 * static_cast<double>(m) && mp <= m) {
      plan.N = N;
      plan.m_prime = mp;
      break;
    }
  }
  return plan;
}

BlockPlan make_rate_plan(long long n, double p, double lambda, double c0) {
  const auto bad = validate_lambda(lambda, p);
  if (!bad.empty()) raise(bad.front());
  if (!(c0 > 0.0 && c0 <= 1.0))
    throw ConfigError("block-fraction", "blocks.c0: c0 must lie in (0, 1]");
  const auto N = static_cast<long long>(
      std::floor(std::pow(static_cast<double>(n), lambda) * (1.0 + 1e-12)));
  if (N < 2)
    throw GateError("block-plan-infeasible",
                    "blocks.lambda: n^lambda gives N = " + std::to_string(N) + " < 2 blocks");
  // m' = n - 2(N-1)m in [c0 m, m]  <=>  n/(2N-1) <= m <= n/(2(N-1)+c0)
  const auto lo = static_cast<long long>(std::ceil(static_cast<double>(n) / (2 * N - 1)));
  for (long long m = std::max(lo, 1LL); 2 * (N - 1) * m < n; ++m) {
    const long long mp = n - 2 * (N - 1) * m;
    if (mp <= m && mp >= c0 * static_cast<double>(m)) {
      BlockPlan plan{n, m, N, mp, c0, lambda};
      return plan;
    }
  }
  throw GateError("block-plan-infeasible",
                  "blocks.lambda: no m satisfies n = 2(N-1)m + m' with N = " +
                      std::to_string(N) + " and c0 m <= m' <= m");
}

bool free_under_conditioning(long long index, long long m) noexcept {
  if (index >= 1) return ((index - 1) / m) % 2 == 0;
  return index <= -m;
}

namespace {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  ///< unbiased
};

// Conditional MC at one coordinate window. `theta` is the base window
// (oldest first, depth+1 slots), `redraw` the replacement innovations.
void replace_deep(std::vector<double>& window, const double* redraw, std::size_t depth,
                  std::size_t dim, int m) {
  for (std::size_t j = static_cast<std::size_t>(m); j <= depth; ++j) {
    const std::size_t slot = (depth - j) * dim;
    std::copy_n(redraw + slot, dim, window.begin() + slot);
  }
}

double exact_linear_approx(const Process& process, const double* theta, int m) {
  // theta points at eps_k of a scalar stream
  double y = 0.0;
  for (int i = 0; i < m && i <= process.window(); ++i)
    y += process.linear_coefficient(i) * theta[-i];
  return y;
}

}  // namespace

ApproxPair m_approx(const Process& process, std::size_t n, int m, int redraws,
                    Seed64 seed, bool force_monte_carlo) {
  if (m < 1) throw ConfigError("approx-depth", "need m >= 1");
  if (redraws < 1) throw ConfigError("redraws", "T must be >= 1");
  if (n == 0) throw ConfigError("path-length", "n must be >= 1");
  const std::size_t dim = process.dimension();
  const auto depth = static_cast<std::size_t>(process.depth());
  const std::size_t count = n + depth;
  std::vector<double> base(count * dim);
  fill(stream_for(process, seed), 1 - process.depth(), count, base);

  ApproxPair out;
  out.m = m;
  out.redraws = redraws;
  out.x.resize(n);
  out.approx.assign(n, 0.0);
  out.noise_var.assign(n, 0.0);
  process.path(base.data(), n, out.x.data());

  if (process.linear_identity() && !force_monte_carlo) {
    out.exact = true;
    for (std::size_t k = 0; k < n; ++k)
      out.approx[k] = exact_linear_approx(process, base.data() + (k + depth) * dim, m);
  } else {
    std::vector<double> sq(n, 0.0), redraw(count * dim), window((depth + 1) * dim);
    for (int t = 0; t < redraws; ++t) {
      fill(stream_for(process, derive_seed(seed, static_cast<std::uint64_t>(t)),
                      StreamId::double_primed),
           1 - process.depth(), count, redraw);
      for (std::size_t k = 0; k < n; ++k) {
        std::copy_n(base.data() + k * dim, window.size(), window.begin());
        replace_deep(window, redraw.data() + k * dim, depth, dim, m);
        const double v = process.evaluate(window.data() + depth * dim);
        out.approx[k] += v;
        sq[k] += v * v;
      }
    }
    const double T = redraws;
    for (std::size_t k = 0; k < n; ++k) {
      const double mean = out.approx[k] / T;
      out.approx[k] = mean;
      out.noise_var[k] =
          redraws > 1 ? std::max(0.0, (sq[k] - T * mean * mean) / (T - 1.0)) / T : 0.0;
    }
  }
  out.residual.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.residual[k] = out.x[k] - out.approx[k];
  return out;
}

ResidualNorm residual_norm(const Process& process, int m, double p, int redraws,
                           std::size_t replications, Seed64 seed, bool force_monte_carlo,
                           const Executor& executor) {
  if (replications < 2) throw ConfigError("replications", "need R >= 2");
  std::vector<double> res(replications), noise(replications);
  executor.for_each(replications, [&](std::size_t r, unsigned) {
    const auto pair = m_approx(process, 1, m, redraws, derive_seed(seed, r), force_monte_carlo);
    res[r] = pair.residual[0];
    noise[r] = pair.noise_var[0];
  });
  ResidualNorm out;
  out.raw = numeric::lp_norm_estimate(res, p);
  if (p == 2.0) {
    std::vector<double> z(replications);
    for (std::size_t r = 0; r < replications; ++r) z[r] = res[r] * res[r] - noise[r];
    const auto e = numeric::mean_estimate(z);
    if (e.value > 0.0) {
      const double norm = std::sqrt(e.value);
      out.corrected = {norm, e.se / (2.0 * norm)};
    }
  } else {
    out.corrected = out.raw;
  }
  return out;
}

ApproximationError approximation_error(const Process& process, std::size_t n, int m,
                                       double p, std::size_t replications, int redraws,
                                       Seed64 seed, double delta, double s2_n,
                                       const Executor& executor) {
  if (replications < 2) throw ConfigError("replications", "need R >= 2");
  if (!(delta > 0.0)) throw ConfigError("tail-threshold", "delta must be positive");
  std::vector<double> diff(replications), hit(replications);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double threshold = delta * std::sqrt(s2_n) * sqrt_n;
  executor.for_each(replications, [&](std::size_t r, unsigned) {
    const auto pair = m_approx(process, n, m, redraws, derive_seed(seed, r));
    double s = 0.0;
    for (double v : pair.residual) s += v;
    diff[r] = s / sqrt_n;
    hit[r] = std::abs(s) >= threshold ? 1.0 : 0.0;
  });
  ApproximationError out;
  out.scaled_norm = numeric::lp_norm_estimate(diff, p);
  out.tail_probability = numeric::mean_estimate(hit);
  out.delta = delta;
  out.reference = std::pow(delta * static_cast<double>(n), -p);
  return out;
}

BlockDecomposition decompose(const Process& process, const BlockPlan& plan,
                             std::size_t replications, int redraws, Seed64 seed,
                             const Executor& executor) {
  if (plan.n != 2 * (plan.N - 1) * plan.m + plan.m_prime || plan.N < 1)
    throw ConfigError("block-plan", "plan violates n = 2(N-1)m + m'");
  if (redraws < 2) throw ConfigError("redraws", "T must be >= 2 for conditional variances");
  if (replications < 2) throw ConfigError("replications", "need R >= 2");
  const long long m = plan.m;
  if (process.depth() >= m) {
    bool close = false;
    if (process.linear_identity()) {
      double tail = 0.0;
      for (int i = static_cast<int>(m); i <= process.window(); ++i)
        tail += process.linear_coefficient(i) * process.linear_coefficient(i);
      close = std::sqrt(tail * process.spec().innovation.variance()) <= 1e-6;
    }
    if (!close)
      throw GateError("not-m-dependent",
                      "process is not m-dependent at tolerance 1e-6 for m = " +
                          std::to_string(m));
  }

  const auto n = static_cast<std::size_t>(plan.n);
  const auto N = static_cast<std::size_t>(plan.N);
  const std::size_t dim = process.dimension();
  const auto depth = static_cast<std::size_t>(process.depth());
  const std::size_t count = n + depth;
  const double nd = static_cast<double>(plan.n);
  const double T = redraws;

  std::vector<unsigned char> is_free(count);
  for (std::size_t i = 0; i < count; ++i)
    is_free[i] = free_under_conditioning(static_cast<long long>(i) + 1 - process.depth(), m);

  struct PerRep {
    double sn2, sigma2, varsigma2, additivity;
    double c12, v1, v2;  // centered cross and squared block-1/2 redraw sums
  };
  std::vector<PerRep> reps(replications);
  std::vector<double> sigma_jm2(N * replications);
  struct Scratch {
    std::vector<double> base, redraw, mixed, x, xt, mean_x, block_t;
  };
  std::vector<Scratch> scratch(executor.workers());

  executor.for_each(replications, [&](std::size_t r, unsigned w) {
    auto& s = scratch[w];
    const Seed64 sr = derive_seed(seed, r);
    s.base.resize(count * dim);
    s.redraw.resize(count * dim);
    s.mixed.resize(count * dim);
    s.x.resize(n);
    s.xt.resize(n);
    s.mean_x.assign(n, 0.0);
    s.block_t.assign(N * static_cast<std::size_t>(redraws), 0.0);
    fill(stream_for(process, sr), 1 - process.depth(), count, s.base);
    process.path(s.base.data(), n, s.x.data());

    for (int t = 0; t < redraws; ++t) {
      fill(stream_for(process, derive_seed(sr, static_cast<std::uint64_t>(t)),
                      StreamId::double_primed),
           1 - process.depth(), count, s.redraw);
      for (std::size_t i = 0; i < count; ++i) {
        const double* src = is_free[i] ? s.redraw.data() : s.base.data();
        std::copy_n(src + i * dim, dim, s.mixed.begin() + i * dim);
      }
      process.path(s.mixed.data(), n, s.xt.data());
      for (std::size_t k = 0; k < n; ++k) {
        s.mean_x[k] += s.xt[k];
        s.block_t[(k / (2 * m)) * redraws + t] += s.xt[k];
      }
    }
    for (double& v : s.mean_x) v /= T;

    double sn = 0.0, s1 = 0.0, s2 = 0.0, ysum = 0.0;
    std::vector<double> y1(N, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      sn += s.x[k];
      s2 += s.mean_x[k];
      s1 += s.x[k] - s.mean_x[k];
      y1[k / (2 * m)] += s.x[k] - s.mean_x[k];
    }
    for (double y : y1) ysum += y;

    double total_var = 0.0;
    std::vector<double> block_mean(N);
    for (std::size_t j = 0; j < N; ++j) {
      const double* b = s.block_t.data() + j * redraws;
      double mean = 0.0;
      for (int t = 0; t < redraws; ++t) mean += b[t];
      mean /= T;
      block_mean[j] = mean;
      double ss = 0.0;
      for (int t = 0; t < redraws; ++t) ss += (b[t] - mean) * (b[t] - mean);
      const double var = ss / (T - 1.0);
      total_var += var;
      sigma_jm2[j * replications + r] = var / (2.0 * static_cast<double>(m));
    }

    PerRep& out = reps[r];
    out.sn2 = sn * sn / nd;
    out.sigma2 = total_var / nd;
    out.varsigma2 = (s2 * s2 - total_var / T) / nd;
    out.additivity = std::max(std::abs(sn - (s1 + s2)), std::abs(s1 - ysum));
    out.c12 = out.v1 = out.v2 = 0.0;
    if (N >= 2) {
      for (int t = 0; t < redraws; ++t) {
        const double a = s.block_t[t] - block_mean[0];
        const double b = s.block_t[redraws + t] - block_mean[1];
        out.c12 += a * b;
        out.v1 += a * a;
        out.v2 += b * b;
      }
    }
  });

  BlockDecomposition d;
  d.plan = plan;
  d.replications = replications;
  d.redraws = redraws;
  std::vector<double> sn2(replications), sig(replications), vs(replications),
      resid(replications);
  double c12 = 0.0, v1 = 0.0, v2 = 0.0;
  for (std::size_t r = 0; r < replications; ++r) {
    sn2[r] = reps[r].sn2;
    sig[r] = reps[r].sigma2;
    vs[r] = reps[r].varsigma2;
    resid[r] = reps[r].sn2 - reps[r].sigma2 - reps[r].varsigma2;
    d.max_additivity_error = std::max(d.max_additivity_error, reps[r].additivity);
    c12 += reps[r].c12;
    v1 += reps[r].v1;
    v2 += reps[r].v2;
  }
  d.s2_nm = numeric::mean_estimate(sn2);
  d.sigma_bar2 = numeric::mean_estimate(sig);
  d.varsigma_bar2 = numeric::mean_estimate(vs);
  d.residual = numeric::mean_estimate(resid);
  d.adjacent_correlation = v1 > 0.0 && v2 > 0.0 ? c12 / std::sqrt(v1 * v2) : 0.0;
  for (std::size_t j = 0; j < N; ++j)
    d.sigma_j2.push_back(numeric::mean_estimate(
        std::span<const double>(sigma_jm2.data() + j * replications, replications)));
  d.sigma_jm2 = std::move(sigma_jm2);
  return d;
}

std::string block_variance_csv(const BlockDecomposition& d) {
  std::ostringstream out;
  out << "j,sigma_j2,se\n";
  for (std::size_t j = 0; j < d.sigma_j2.size(); ++j)
    out << j + 1 << ',' << text::format_real(d.sigma_j2[j].value) << ','
        << text::format_real(d.sigma_j2[j].se) << '\n';
  return out.str();
}

}  // namespace shiftlab
