#include "shiftlab/distances.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shiftlab/error.hpp"
#include "shiftlab/text.hpp"

namespace shiftlab {

using numeric::normal_cdf;

double dkw_half_width(std::size_t replications, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(replications)));
}

StepCdf StepCdf::from_sorted(const std::vector<double>& sorted) {
  StepCdf cdf;
  const double R = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    cdf.atoms.push_back(sorted[i]);
    cdf.cum.push_back(static_cast<double>(i + 1) / R);
  }
  return cdf;
}

double StepCdf::operator()(double x) const {
  const auto it = std::upper_bound(atoms.begin(), atoms.end(), x);
  return it == atoms.begin() ? 0.0 : cum[static_cast<std::size_t>(it - atoms.begin()) - 1];
}

double StepCdf::left_limit(double x) const {
  const auto it = std::lower_bound(atoms.begin(), atoms.end(), x);
  return it == atoms.begin() ? 0.0 : cum[static_cast<std::size_t>(it - atoms.begin()) - 1];
}

StandardizedSampleSet standardize(std::vector<double> sums, std::size_t n, double v,
                                  std::string source) {
  if (!(v > 0.0)) throw GateError("degenerate-variance", "normalizer must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n) * v);
  for (double& s : sums) s *= scale;
  std::sort(sums.begin(), sums.end());
  StandardizedSampleSet out;
  out.sorted = std::move(sums);
  out.normalizer = v;
  out.normalizer_source = std::move(source);
  out.n = n;
  return out;
}

std::vector<double> sample_sums(const Process& process, std::size_t n,
                                std::size_t replications, Seed64 seed,
                                const Executor& executor) {
  std::vector<double> sums(replications);
  std::vector<PathWorkspace> ws(executor.workers());
  executor.for_each(replications, [&](std::size_t r, unsigned w) {
    sums[r] = simulate_sum(process, n, derive_seed(seed, r), ws[w]);
  });
  return sums;
}

KolmogorovResult kolmogorov(const StepCdf& cdf) {
  KolmogorovResult out;
  double prev = 0.0;
  for (std::size_t i = 0; i < cdf.atoms.size(); ++i) {
    const double phi = normal_cdf(cdf.atoms[i]);
    const double gap = std::max(std::abs(cdf.cum[i] - phi), std::abs(prev - phi));
    if (gap > out.distance) {
      out.distance = gap;
      out.location = cdf.atoms[i];
    }
    prev = cdf.cum[i];
  }
  return out;
}

KolmogorovResult empirical_kolmogorov(const StandardizedSampleSet& samples, double delta) {
  if (samples.size() < kMinDistanceSamples)
    throw ConfigError("replications", "distance reports need R >= " +
                                          std::to_string(kMinDistanceSamples));
  auto out = kolmogorov(StepCdf::from_sorted(samples.sorted));
  out.dkw = dkw_half_width(samples.size(), delta);
  return out;
}

StepCdf rademacher_cdf(int n) {
  if (n < 1 || n > 40)
    throw ConfigError("oracle-size", "exact Rademacher enumeration needs 1 <= n <= 40");
  StepCdf cdf;
  const double total = std::ldexp(1.0, n);
  const double root = std::sqrt(static_cast<double>(n));
  double binom = 1.0, acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    acc += binom;
    cdf.atoms.push_back((2.0 * k - n) / root);
    cdf.cum.push_back(acc / total);
    binom = binom * (n - k) / (k + 1);
  }
  return cdf;
}

double exact_kolmogorov_rademacher(int n) { return kolmogorov(rademacher_cdf(n)).distance; }

namespace {

constexpr double kGridHalfWidth = 8.0;
constexpr int kGridIntervals = 2048;

}  // namespace

LqResult lq_distance(const StepCdf& cdf, double q) {
  if (!(q >= 1.0)) throw ConfigError("lq-order", "q must be >= 1");
  LqResult out;
  out.q = q;
  out.sup = kolmogorov(cdf).distance;
  const double lo = cdf.atoms.empty() ? -kGridHalfWidth
                                      : std::min(-kGridHalfWidth, cdf.atoms.front() - 1.0);
  const double hi = cdf.atoms.empty() ? kGridHalfWidth
                                      : std::max(kGridHalfWidth, cdf.atoms.back() + 1.0);
  out.lower = lo;
  out.upper = hi;

  std::vector<double> breaks;
  breaks.reserve(cdf.atoms.size() + kGridIntervals + 3);
  breaks.push_back(lo);
  for (int i = 0; i <= kGridIntervals; ++i)
    breaks.push_back(-kGridHalfWidth + 2.0 * kGridHalfWidth * i / kGridIntervals);
  breaks.insert(breaks.end(), cdf.atoms.begin(), cdf.atoms.end());
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double integral = 0.0, l1 = 0.0, tol = 0.0;
  std::size_t atom = 0;  // atoms[0..atom) are <= current left endpoint
  auto piece = [&](double a, double b, double level) {
    auto fq = [&](double x) { return std::pow(std::abs(level - normal_cdf(x)), q); };
    auto f1 = [&](double x) { return std::abs(level - normal_cdf(x)); };
    const double v10 = numeric::gauss_legendre(fq, a, b, 10);
    const double v3 = numeric::gauss_legendre(fq, a, b, 3);
    integral += v10;
    tol += std::abs(v10 - v3);
    l1 += q == 1.0 ? v10 : numeric::gauss_legendre(f1, a, b, 10);
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    while (atom < cdf.atoms.size() && cdf.atoms[atom] <= a) ++atom;
    const double level = atom == 0 ? 0.0 : cdf.cum[atom - 1];
    // |level - Phi| has a kink where Phi crosses the level
    if (level > 0.0 && level < 1.0) {
      const double cross = numeric::normal_quantile(level);
      if (cross > a && cross < b) {
        piece(a, cross, level);
        piece(cross, b, level);
        continue;
      }
    }
    piece(a, b, level);
  }
  // Outside [lo, hi] the step CDF is 0 (left) or 1 (right); bound the Gaussian mass.
  tol += numeric::normal_cdf_integral(lo) + numeric::normal_cdf_integral(-hi);
  out.integral = integral;
  out.l1 = l1;
  out.quadrature_tol = tol;
  out.bound = std::pow(out.sup, q - 1.0) * l1;
  out.bound_holds = out.integral <= out.bound + tol;
  return out;
}

LqResult lq_distance(const StandardizedSampleSet& samples, double q) {
  return lq_distance(StepCdf::from_sorted(samples.sorted), q);
}

std::vector<double> default_nonuniform_grid() {
  std::vector<double> grid;
  for (int i = -600; i <= 600; ++i) grid.push_back(i / 100.0);
  return grid;
}

NonuniformProfile nonuniform_profile(const StandardizedSampleSet& samples, double p,
                                     const std::vector<double>& grid) {
  if (grid.empty() || grid.front() > -6.0 || grid.back() < 6.0)
    throw ConfigError("grid-range", "nonuniform grid must cover [-6, 6]");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] + grid[grid.size() - 1 - i]) > 1e-12)
      throw ConfigError("grid-symmetry", "nonuniform grid must be symmetric about 0");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ConfigError("grid-order", "nonuniform grid must be increasing");
  }
  NonuniformProfile out;
  out.p = p;
  out.x = grid;
  const double R = static_cast<double>(samples.size());
  for (double x : grid) {
    const auto below = std::upper_bound(samples.sorted.begin(), samples.sorted.end(), x) -
                       samples.sorted.begin();
    const double gap = std::abs(static_cast<double>(below) / R - normal_cdf(x));
    const double v = (1.0 + std::pow(std::abs(x), p)) * gap;
    out.weighted_gap.push_back(v);
    if (v > out.max) {
      out.max = v;
      out.argmax = x;
    }
  }
  return out;
}

std::string Functional::to_string() const {
  return kind == Kind::power ? "power(" + text::format_real(q) + ")" : "tanh";
}

double Functional::operator()(double x) const {
  const double a = std::abs(x);
  return kind == Kind::power ? std::pow(a, q) : std::tanh(a);
}

double Functional::gaussian_value() const {
  if (kind == Kind::power) return numeric::gaussian_abs_moment(q);
  return 2.0 * numeric::integrate([](double x) { return std::tanh(x) * numeric::normal_pdf(x); },
                                  0.0, 40.0, 400);
}

FunctionalGap functional_gap(const StandardizedSampleSet& samples, const Functional& f,
                             double p) {
  if (f.kind == Functional::Kind::power && !(f.q < p))
    throw ConfigError("functional-order", "power functional needs q < p (q = " +
                                              text::format_real(f.q) + ", p = " +
                                              text::format_real(p) + ")");
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) values[i] = f(samples.sorted[i]);
  const auto est = numeric::mean_estimate(values);
  FunctionalGap out;
  out.sample_mean = est.value;
  out.sample_se = est.se;
  out.gaussian = f.gaussian_value();
  out.signed_gap = est.value - out.gaussian;
  out.gap = std::abs(out.signed_gap);
  return out;
}

TailTable tail_probability(const StandardizedSampleSet& samples,
                           const std::vector<double>& xs) {
  TailTable out;
  const double R = static_cast<double>(samples.size());
  std::vector<double> lx, lp;
  for (double x : xs) {
    if (!(x >= 0.0)) throw ConfigError("tail-threshold", "tail thresholds must be >= 0");
    // |S| >= x  <=>  S <= -x or S >= x
    const auto lower = std::upper_bound(samples.sorted.begin(), samples.sorted.end(), -x) -
                       samples.sorted.begin();
    const auto upper = samples.sorted.end() -
                       std::lower_bound(samples.sorted.begin(), samples.sorted.end(), x);
    double count = static_cast<double>(lower + upper);
    if (x == 0.0) count = R;
    TailRow row;
    row.x = x;
    row.probability = count / R;
    row.se = std::sqrt(row.probability * (1.0 - row.probability) / R);
    row.gaussian = 2.0 * numeric::normal_sf(x);
    out.rows.push_back(row);
    if (x > 0.0 && row.probability > 0.0) {
      lx.push_back(std::log(x));
      lp.push_back(std::log(row.probability));
    }
  }
  if (lx.size() >= 3) out.log_slope = numeric::weighted_line_fit(lx, lp).slope;
  return out;
}

DistanceReport distance_report(const StandardizedSampleSet& samples,
                               const DistanceOptions& options) {
  DistanceReport out;
  out.n = samples.n;
  out.replications = samples.size();
  out.normalizer = samples.normalizer;
  out.normalizer_source = samples.normalizer_source;
  out.kolmogorov = empirical_kolmogorov(samples);
  out.lq = lq_distance(samples, options.q);
  out.nonuniform = nonuniform_profile(samples, options.p, default_nonuniform_grid());
  for (double q : options.moment_qs)
    out.moment_gaps.emplace_back(q, functional_gap(samples, Functional::power(q), options.p));
  out.tails = tail_probability(samples, options.tail_xs);
  return out;
}

std::string nonuniform_csv(const NonuniformProfile& profile) {
  std::ostringstream out;
  out << "x,weighted_gap\n";
  for (std::size_t i = 0; i < profile.x.size(); ++i)
    out << text::format_real(profile.x[i]) << ',' << text::format_real(profile.weighted_gap[i])
        << '\n';
  return out.str();
}

std::string tail_csv(const TailTable& table) {
  std::ostringstream out;
  out << "x,probability,se,gaussian\n";
  for (const auto& r : table.rows)
    out << text::format_real(r.x) << ',' << text::format_real(r.probability) << ','
        << text::format_real(r.se) << ',' << text::format_real(r.gaussian) << '\n';
  return out.str();
}

}  // namespace shiftlab
