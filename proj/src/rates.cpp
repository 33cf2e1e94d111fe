#include "shiftlab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shiftlab/error.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/text.hpp"
#include "shiftlab/variance.hpp"

namespace shiftlab {

std::string to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::kolmogorov: return "kolmogorov";
    case StatisticKind::lq: return "lq";
    case StatisticKind::nonuniform_max: return "nonuniform-max";
    case StatisticKind::moment_gap: return "moment-gap";
    case StatisticKind::tail: return "tail";
  }
  return "?";
}

StatisticKind parse_statistic(const std::string& name) {
  for (auto k : {StatisticKind::kolmogorov, StatisticKind::lq, StatisticKind::nonuniform_max,
                 StatisticKind::moment_gap, StatisticKind::tail})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown-statistic", "unknown statistic '" + name + "'");
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::consistent: return "consistent";
    case Verdict::inconsistent: return "inconsistent";
    case Verdict::underpowered: return "underpowered";
  }
  return "?";
}

double theoretical_slope(StatisticKind kind, double p, double q) {
  if (kind == StatisticKind::lq) return -q / 2.0;
  return -std::min(p, 3.0) / 2.0 + 1.0;
}

namespace {

numeric::LineFit fit_points(const std::vector<const RatePoint*>& pts) {
  std::vector<double> x, y, w;
  bool weighted = true;
  for (const auto* p : pts) {
    x.push_back(std::log(p->n));
    y.push_back(std::log(p->value));
    weighted = weighted && p->se > 0.0;
    w.push_back(p->se > 0.0 ? (p->value / p->se) * (p->value / p->se) : 0.0);
  }
  return numeric::weighted_line_fit(x, y, weighted ? std::span<const double>(w)
                                                   : std::span<const double>{});
}

}  // namespace

RateFit fit_rate(RateSeries& series, const FitOptions& options) {
  for (std::size_t i = 1; i < series.points.size(); ++i)
    if (!(series.points[i].n > series.points[i - 1].n)) {
      // order does not matter for the fit; keep a sorted copy
      std::sort(series.points.begin(), series.points.end(),
                [](const RatePoint& a, const RatePoint& b) { return a.n < b.n; });
      break;
    }
  RateFit fit;
  fit.tolerance = options.tolerance;
  fit.theoretical = theoretical_slope(series.kind, series.p, series.q);
  std::vector<const RatePoint*> used;
  for (auto& pt : series.points) {
    if (pt.value < 0.0) throw ConfigError("rate-value", "series values must be >= 0");
    pt.used = pt.value > pt.floor && pt.value > 0.0;
    if (pt.used)
      used.push_back(&pt);
    else
      ++fit.excluded_points;
  }
  fit.used_points = used.size();
  if (used.size() < 4) return fit;

  const auto point = fit_points(used);
  fit.fitted = true;
  fit.slope = point.slope;
  fit.intercept = point.intercept;

  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(options.resamples));
  const std::size_t k = used.size();
  std::vector<const RatePoint*> sample(k);
  for (int b = 0; b < options.resamples; ++b) {
    for (std::size_t i = 0; i < k; ++i) {
      const double u = draw_uniform(options.seed, StreamId::base,
                                    static_cast<std::int64_t>(b * k + i), 0);
      sample[i] = used[std::min(k - 1, static_cast<std::size_t>(u * static_cast<double>(k)))];
    }
    bool distinct = false;
    for (std::size_t i = 1; i < k; ++i) distinct = distinct || sample[i]->n != sample[0]->n;
    if (!distinct) continue;
    slopes.push_back(fit_points(sample).slope);
  }
  std::sort(slopes.begin(), slopes.end());
  if (!slopes.empty()) {
    const double alpha = (1.0 - options.level) / 2.0;
    auto quantile = [&](double a) {
      const double pos = a * static_cast<double>(slopes.size() - 1);
      const auto i = static_cast<std::size_t>(std::floor(pos));
      const double frac = pos - static_cast<double>(i);
      return i + 1 < slopes.size() ? slopes[i] * (1 - frac) + slopes[i + 1] * frac : slopes[i];
    };
    fit.ci_low = std::min(quantile(alpha), fit.slope);
    fit.ci_high = std::max(quantile(1.0 - alpha), fit.slope);
  } else {
    fit.ci_low = fit.ci_high = fit.slope;
  }
  const bool inside = fit.theoretical >= fit.ci_low - fit.tolerance &&
                      fit.theoretical <= fit.ci_high + fit.tolerance;
  fit.verdict = inside ? Verdict::consistent : Verdict::inconsistent;
  return fit;
}

RateSeries rate_sweep(const Process& process, StatisticKind kind,
                      const std::vector<std::size_t>& n_grid, std::size_t replications,
                      Seed64 seed, const SweepOptions& options, const Executor& executor) {
  if (replications < kMinDistanceSamples)
    throw ConfigError("replications", "rate sweeps need R >= " +
                                          std::to_string(kMinDistanceSamples));
  // Variance gate on the long-run variance before any distance work.
  const int K = std::min(4 * std::max(process.window(), 1), 64);
  const auto table = autocovariance(process, K, options.normalizer_replications,
                                    derive_seed(seed, 0x6a7e), executor);
  long_run_variance(table);

  RateSeries series;
  series.kind = kind;
  series.p = options.p;
  series.q = options.q;
  for (std::size_t n : n_grid) {
    const Seed64 sn = derive_seed(seed, n);
    const auto norm = finite_variance_normalizer(process, static_cast<long long>(n),
                                                 options.normalizer_replications,
                                                 derive_seed(sn, 0x4e0), executor);
    const auto samples = standardize(sample_sums(process, n, replications, sn, executor), n,
                                     norm.value, norm.source);
    const double dkw = dkw_half_width(replications);
    RatePoint pt;
    pt.n = static_cast<double>(n);
    switch (kind) {
      case StatisticKind::kolmogorov:
        pt.value = empirical_kolmogorov(samples).distance;
        pt.se = dkw;
        pt.floor = 3.0 * dkw;
        break;
      case StatisticKind::lq:
        pt.value = lq_distance(samples, options.q).integral;
        pt.se = std::pow(dkw, options.q);
        pt.floor = pt.se;
        break;
      case StatisticKind::nonuniform_max:
        pt.value = nonuniform_profile(samples, options.p, default_nonuniform_grid()).max;
        pt.se = dkw;
        pt.floor = 3.0 * dkw;
        break;
      case StatisticKind::moment_gap: {
        const auto gap = functional_gap(samples, Functional::power(options.q), options.p);
        pt.value = gap.gap;
        pt.se = gap.sample_se;
        pt.floor = 2.0 * gap.sample_se;
        break;
      }
      case StatisticKind::tail: {
        const auto tails = tail_probability(samples, options.tail_xs);
        for (const auto& row : tails.rows)
          pt.value = std::max(pt.value, std::abs(row.probability - row.gaussian));
        pt.se = dkw;
        pt.floor = 3.0 * dkw;
        break;
      }
    }
    series.points.push_back(pt);
  }
  return series;
}

std::string rate_csv(const RateSeries& series) {
  std::ostringstream out;
  out << "n,value,se,floor,used_in_fit\n";
  for (const auto& p : series.points)
    out << text::format_real(p.n) << ',' << text::format_real(p.value) << ','
        << text::format_real(p.se) << ',' << text::format_real(p.floor) << ','
        << (p.used ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace shiftlab
