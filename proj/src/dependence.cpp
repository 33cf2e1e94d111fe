#include "shiftlab/dependence.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "shiftlab/error.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/text.hpp"

namespace shiftlab {

namespace {

std::vector<double> weighted_partials(const std::vector<int>& lags,
                                      const std::vector<double>& delta) {
  std::vector<double> out(lags.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double l = lags[i];
    acc += l * l * delta[i];
    out[i] = acc;
  }
  return out;
}

// Goodness below this mean squared log-residual counts as a clean fit.
constexpr double kCleanFit = 0.05;

}  // namespace

DependenceProfile DependenceProfile::from_values(std::vector<int> lags,
                                                 std::vector<double> delta, double p) {
  if (lags.size() != delta.size())
    throw ConfigError("profile-shape", "lag and value counts differ");
  DependenceProfile out;
  out.weighted_partial = weighted_partials(lags, delta);
  out.se.assign(lags.size(), 0.0);
  out.lags = std::move(lags);
  out.delta_hat = std::move(delta);
  out.p = p;
  return out;
}

DependenceProfile dependence_profile(const Process& process, double p,
                                     const std::vector<int>& lags,
                                     std::size_t replications, Seed64 seed,
                                     const Executor& executor) {
  if (replications < 100)
    throw ConfigError("replications", "dependence profiles need R >= 100");
  if (!(p >= 1.0) || p > process.spec().moment_order)
    throw ConfigError("moment-order", "p = " + text::format_real(p) +
                                          " exceeds the declared moment order " +
                                          text::format_real(process.spec().moment_order));
  if (lags.empty()) throw ConfigError("lag-range", "no lags requested");
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] < 0 || lags[i] > process.window())
      throw ConfigError("lag-range", "lag " + std::to_string(lags[i]) +
                                         " outside [0, W] with W = " +
                                         std::to_string(process.window()));
    if (i > 0 && lags[i] <= lags[i - 1])
      throw ConfigError("lag-range", "lags must be strictly increasing");
  }

  // One coupled coordinate per replication. This is simulate_coupled with
  // n = 1, with the base window shared across every lag of the profile.
  const std::size_t dim = process.dimension();
  const auto depth = static_cast<std::size_t>(process.depth());
  const std::size_t width = (depth + 1) * dim;
  const std::size_t L = lags.size();
  std::vector<double> diffs(L * replications);
  struct Scratch {
    std::vector<double> base, primed, window;
  };
  std::vector<Scratch> scratch(executor.workers());
  executor.for_each(replications, [&](std::size_t r, unsigned w) {
    auto& s = scratch[w];
    s.base.resize(width);
    s.primed.resize(width);
    s.window.resize(width);
    const Seed64 sr = derive_seed(seed, r);
    fill(stream_for(process, sr, StreamId::base), 1 - process.depth(), depth + 1, s.base);
    fill(stream_for(process, sr, StreamId::primed), 1 - process.depth(), depth + 1,
         s.primed);
    const double* theta_base = s.base.data() + depth * dim;
    const double x = process.evaluate(theta_base);
    for (std::size_t i = 0; i < L; ++i) {
      s.window = s.base;
      const std::size_t slot = (depth - static_cast<std::size_t>(lags[i])) * dim;
      std::copy_n(s.primed.data() + slot, dim, s.window.begin() + slot);
      diffs[i * replications + r] = x - process.evaluate(s.window.data() + depth * dim);
    }
  });

  DependenceProfile out;
  out.lags = lags;
  out.p = p;
  out.replications = replications;
  for (std::size_t i = 0; i < L; ++i) {
    const auto est = numeric::lp_norm_estimate(
        std::span<const double>(diffs.data() + i * replications, replications), p);
    out.delta_hat.push_back(est.value);
    out.se.push_back(est.se);
  }
  out.weighted_partial = weighted_partials(out.lags, out.delta_hat);
  return out;
}

std::string to_string(Summability verdict) {
  switch (verdict) {
    case Summability::summable: return "summable";
    case Summability::not_summable: return "not-summable";
    case Summability::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(DecayFit::Kind kind) {
  return kind == DecayFit::Kind::geometric ? "geometric" : "polynomial";
}

DecayFit decay_fit(const DependenceProfile& profile) {
  std::vector<double> l, logl, logd;
  for (std::size_t i = 0; i < profile.lags.size(); ++i) {
    if (profile.lags[i] < 1 || !(profile.delta_hat[i] > 0.0)) continue;
    l.push_back(profile.lags[i]);
    logl.push_back(std::log(static_cast<double>(profile.lags[i])));
    logd.push_back(std::log(profile.delta_hat[i]));
  }
  if (l.size() < 5)
    throw ConfigError("profile-too-short",
                      "decay fit needs at least 5 positive values at lags >= 1");
  const auto geo = numeric::weighted_line_fit(l, logd);
  const auto poly = numeric::weighted_line_fit(logl, logd);

  DecayFit fit;
  fit.points = l.size();
  fit.last_lag = profile.lags.back();
  fit.geometric_rss = geo.rss;
  fit.polynomial_rss = poly.rss;
  if (geo.rss <= 1.1 * poly.rss) {
    fit.kind = DecayFit::Kind::geometric;
    fit.parameter = std::exp(geo.slope);
    fit.log_scale = geo.intercept;
    fit.goodness = geo.rss;
  } else {
    fit.kind = DecayFit::Kind::polynomial;
    fit.parameter = -poly.slope;
    fit.log_scale = poly.intercept;
    fit.goodness = poly.rss;
  }

  const double C = std::exp(fit.log_scale);
  const double L = fit.last_lag;
  if (fit.kind == DecayFit::Kind::geometric) {
    const double rho = fit.parameter;
    if (!(rho < 1.0)) {
      fit.extrapolated_tail = std::numeric_limits<double>::infinity();
    } else {
      // sum_{l>L} l^2 rho^l in closed form: d/drho identities of the geometric series
      const double r = rho;
      const double a = L + 1.0;
      const double head = std::pow(r, a);
      const double s = head * (a * a / (1 - r) + (2 * a + 1) * r / ((1 - r) * (1 - r)) +
                               2 * r * r / ((1 - r) * (1 - r) * (1 - r)));
      fit.extrapolated_tail = C * s;
    }
  } else {
    const double a = fit.parameter;
    if (!(a > 3.0)) {
      fit.extrapolated_tail = std::numeric_limits<double>::infinity();
    } else {
      constexpr int kDirect = 100000;
      double s = 0.0;
      for (int i = 1; i <= kDirect; ++i) s += std::pow(L + i, 2.0 - a);
      s += std::pow(L + kDirect + 0.5, 3.0 - a) / (a - 3.0);
      fit.extrapolated_tail = C * s;
    }
  }
  return fit;
}

SummabilityReport summability_report(const DependenceProfile& profile,
                                     const std::optional<DecayFit>& fit) {
  if (profile.lags.size() < 5)
    throw ConfigError("profile-too-short", "summability needs at least 5 lags");
  SummabilityReport out;
  out.partial_sum = profile.weighted_partial.empty() ? 0.0 : profile.weighted_partial.back();
  bool all_zero = true;
  // lag 0 carries weight 0 in the sum
  for (std::size_t i = 0; i < profile.lags.size(); ++i)
    all_zero = all_zero && (profile.lags[i] == 0 || profile.delta_hat[i] == 0.0);
  if (all_zero) {
    out.verdict = Summability::summable;
    return out;
  }
  if (!fit) return out;
  out.tail = fit->extrapolated_tail;
  if (fit->kind == DecayFit::Kind::geometric) {
    out.verdict = fit->parameter > 0.0 && fit->parameter < 1.0 ? Summability::summable
                                                                : Summability::not_summable;
  } else if (!(fit->parameter > 3.0)) {
    out.verdict = Summability::not_summable;
  } else {
    const double mean_sq = fit->goodness / static_cast<double>(fit->points);
    out.verdict = mean_sq <= kCleanFit ? Summability::summable : Summability::inconclusive;
  }
  return out;
}

std::string profile_csv(const DependenceProfile& profile) {
  std::ostringstream out;
  out << "lag,delta_hat,se,weighted_partial_sum\n";
  for (std::size_t i = 0; i < profile.lags.size(); ++i)
    out << profile.lags[i] << ',' << text::format_real(profile.delta_hat[i]) << ','
        << text::format_real(profile.se[i]) << ','
        << text::format_real(profile.weighted_partial[i]) << '\n';
  return out.str();
}

}  // namespace shiftlab
