#include "shiftlab/variance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shiftlab/error.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/text.hpp"

namespace shiftlab {

double AutocovarianceTable::at(long long k) const noexcept {
  const long long h = k < 0 ? -k : k;
  return h < static_cast<long long>(gamma.size()) ? gamma[static_cast<std::size_t>(h)] : 0.0;
}

AutocovarianceTable AutocovarianceTable::analytic(std::vector<double> gamma) {
  if (gamma.empty()) throw ConfigError("table-empty", "autocovariance table needs lag 0");
  AutocovarianceTable t;
  t.se.assign(gamma.size(), 0.0);
  t.gamma = std::move(gamma);
  t.source = Source::analytic;
  return t;
}

std::string to_string(AutocovarianceTable::Source source) {
  return source == AutocovarianceTable::Source::analytic ? "analytic" : "monte-carlo";
}

AutocovarianceTable autocovariance(const Process& process, int max_lag,
                                   std::size_t replications, Seed64 seed,
                                   const Executor& executor) {
  if (max_lag < 0) throw ConfigError("max-lag", "K must be >= 0");
  if (max_lag > 4 * std::max(process.window(), 1))
    throw ConfigError("max-lag", "K = " + std::to_string(max_lag) + " exceeds 4W = " +
                                     std::to_string(4 * std::max(process.window(), 1)));
  if (process.analytic_autocovariance(0)) {
    std::vector<double> g(static_cast<std::size_t>(max_lag) + 1);
    for (int k = 0; k <= max_lag; ++k) g[k] = *process.analytic_autocovariance(k);
    return AutocovarianceTable::analytic(std::move(g));
  }
  return monte_carlo_autocovariance(process, max_lag, replications, seed, executor);
}

AutocovarianceTable monte_carlo_autocovariance(const Process& process, int max_lag,
                                               std::size_t replications, Seed64 seed,
                                               const Executor& executor) {
  if (max_lag < 0) throw ConfigError("max-lag", "K must be >= 0");
  if (replications < 2) throw ConfigError("replications", "MC autocovariance needs R >= 2");

  const auto K = static_cast<std::size_t>(max_lag);
  // products[k * R + r] = X_1 X_{1+k}; z[r] = X_1 (X_1 + 2 sum_k X_{1+k})
  std::vector<double> products((K + 1) * replications), z(replications);
  std::vector<PathWorkspace> ws(executor.workers());
  const std::size_t dim = process.dimension();
  const std::size_t count = K + 1 + static_cast<std::size_t>(process.depth());
  executor.for_each(replications, [&](std::size_t r, unsigned w) {
    auto& s = ws[w];
    s.innovations.resize(count * dim);
    s.values.resize(K + 1);
    fill(stream_for(process, derive_seed(seed, r)), 1 - process.depth(), count,
         s.innovations);
    process.path(s.innovations.data(), K + 1, s.values.data());
    const double x0 = s.values[0];
    double acc = x0;
    for (std::size_t k = 0; k <= K; ++k) {
      products[k * replications + r] = x0 * s.values[k];
      if (k > 0) acc += 2.0 * s.values[k];
    }
    z[r] = x0 * acc;
  });

  AutocovarianceTable t;
  t.source = AutocovarianceTable::Source::monte_carlo;
  t.replications = replications;
  for (std::size_t k = 0; k <= K; ++k) {
    const auto est = numeric::mean_estimate(
        std::span<const double>(products.data() + k * replications, replications));
    t.gamma.push_back(est.value);
    t.se.push_back(est.se);
  }
  t.long_run_se = numeric::mean_estimate(z).se;
  return t;
}

LongRunVariance long_run_variance(const AutocovarianceTable& table,
                                  std::optional<double> decay_ratio) {
  LongRunVariance out;
  double s = table.gamma.at(0);
  for (std::size_t k = 1; k < table.gamma.size(); ++k) s += 2.0 * table.gamma[k];
  if (decay_ratio) {
    const double rho = *decay_ratio;
    if (!(rho > 0.0 && rho < 1.0))
      throw ConfigError("decay-ratio", "tail extrapolation needs 0 < rho < 1");
    out.tail = 2.0 * table.gamma.back() * rho / (1.0 - rho);
  }
  out.s2 = s + out.tail;
  out.se = table.long_run_se;
  if (!(out.s2 > 0.0))
    throw GateError("degenerate-variance",
                    "long-run variance s^2 = " + text::format_real(out.s2) +
                        " is not positive; the CLT normalizer is degenerate");
  return out;
}

FiniteVariance finite_n_variance(const AutocovarianceTable& table, long long n) {
  if (n < 1) throw ConfigError("path-length", "n must be >= 1");
  const long long K = table.max_lag();
  const double nd = static_cast<double>(n);
  double direct = table.at(0) * nd;
  for (long long k = 1; k < n && k <= K; ++k) direct += 2.0 * (nd - k) * table.at(k);
  double s2 = table.at(0), wedge = 0.0;
  for (long long k = 1; k <= K; ++k) {
    s2 += 2.0 * table.at(k);
    wedge += 2.0 * static_cast<double>(std::min(n, k)) * table.at(k);
  }
  FiniteVariance out;
  out.direct = direct / nd;
  out.identity_minus = (nd * s2 - wedge) / nd;
  out.identity_plus = (nd * s2 + wedge) / nd;
  out.residual_minus = out.identity_minus - out.direct;
  out.residual_plus = out.identity_plus - out.direct;
  const double tol = 1e-12 * std::max(1.0, std::abs(out.direct));
  const bool minus = std::abs(out.residual_minus) <= tol;
  const bool plus = std::abs(out.residual_plus) <= tol;
  out.reconciling_sign = minus && plus ? "both" : minus ? "minus" : plus ? "plus" : "neither";
  return out;
}

SigmaHat sigma_hat_m(const AutocovarianceTable& table, long long m) {
  if (m < 1) throw ConfigError("block-length", "m must be >= 1");
  const double md = static_cast<double>(m);
  // sum_{k,l=1}^m gamma(k - l) grouped by h = k - l
  double dbl = md * table.at(0);
  for (long long h = 1; h < m; ++h) dbl += 2.0 * (md - h) * table.at(h);
  double s2m = table.at(0), wedge = 0.0;
  for (long long k = 1; k <= m; ++k) {
    s2m += 2.0 * table.at(k);
    wedge += 2.0 * static_cast<double>(std::min(m, k)) * table.at(k);
  }
  SigmaHat out;
  out.double_sum = dbl / (2.0 * md);
  out.identity = (md * s2m - wedge) / (2.0 * md);
  out.residual = out.identity - out.double_sum;
  out.s2_m = s2m;
  return out;
}

double lemma_constant(const AutocovarianceTable& table) {
  double c = 0.0;
  for (std::size_t k = 1; k < table.gamma.size(); ++k)
    c += static_cast<double>(k) * std::abs(table.gamma[k]);
  return 2.0 * c;
}

VarianceReport variance_report(const Process& process, int max_lag, long long n,
                               long long m, std::size_t replications, Seed64 seed,
                               const Executor& executor) {
  VarianceReport out;
  out.table = autocovariance(process, max_lag, replications, seed, executor);
  out.long_run = long_run_variance(out.table);
  out.n = n;
  out.m = m;
  out.finite = finite_n_variance(out.table, n);
  out.sigma_hat = sigma_hat_m(out.table, m);
  return out;
}

std::string autocovariance_csv(const AutocovarianceTable& table) {
  std::ostringstream out;
  out << "lag,gamma,se\n";
  for (std::size_t k = 0; k < table.gamma.size(); ++k)
    out << k << ',' << text::format_real(table.gamma[k]) << ','
        << text::format_real(table.se[k]) << '\n';
  return out.str();
}

Normalizer finite_variance_normalizer(const Process& process, long long n,
                                      std::size_t replications, Seed64 seed,
                                      const Executor& executor) {
  if (n < 1) throw ConfigError("path-length", "n must be >= 1");
  if (process.analytic_autocovariance(0)) {
    const long long K = std::min<long long>(n - 1, 4LL * std::max(process.window(), 1));
    std::vector<double> g(static_cast<std::size_t>(K) + 1);
    for (long long k = 0; k <= K; ++k) g[k] = *process.analytic_autocovariance(k);
    const double v = finite_n_variance(AutocovarianceTable::analytic(std::move(g)), n).direct;
    if (!(v > 0.0))
      throw GateError("degenerate-variance", "analytic s_n^2 is not positive");
    return {v, "analytic-sn2"};
  }
  if (replications < 2) throw ConfigError("replications", "MC normalizer needs R >= 2");
  std::vector<double> sq(replications);
  std::vector<PathWorkspace> ws(executor.workers());
  executor.for_each(replications, [&](std::size_t r, unsigned w) {
    const double s = simulate_sum(process, static_cast<std::size_t>(n),
                                  derive_seed(seed, r), ws[w]);
    sq[r] = s * s;
  });
  const double v = numeric::mean_estimate(sq).value / static_cast<double>(n);
  if (!(v > 0.0)) throw GateError("degenerate-variance", "MC s_n^2 is not positive");
  return {v, "mc-sn2"};
}

}  // namespace shiftlab
