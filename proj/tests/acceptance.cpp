// Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion; exits 1
// if any selected criterion fails. `--only N` runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shiftlab/blocks.hpp"
#include "shiftlab/dependence.hpp"
#include "shiftlab/distances.hpp"
#include "shiftlab/error.hpp"
#include "shiftlab/rates.hpp"
#include "shiftlab/runner.hpp"
#include "shiftlab/variance.hpp"

using namespace shiftlab;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr std::uint64_t kSeed = 20261015;
constexpr std::size_t kOracleR = 100000;
constexpr double kOracleSeconds = 30.0;
constexpr std::size_t kRateR = 200000;
constexpr double kSlopeTarget = -0.5;
constexpr double kSlopeTol = 0.15;
constexpr double kIdentityTol = 1e-12;
constexpr std::size_t kVarianceR = 100000;
constexpr std::size_t kProfileR = 100000;
constexpr double kRhoTol = 0.05;
constexpr std::size_t kBlockR = 10000;
constexpr int kBlockT = 32;
constexpr std::size_t kResidualR = 100000;
constexpr int kResidualT = 32;
constexpr std::size_t kMomentR = 200000;
constexpr double kMomentSlopeMax = -0.35;
constexpr std::size_t kShapeR = 200000;
constexpr double kShapeFactor = 4.0;
constexpr double kSe = 3.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

ProcessSpec linear(CoefficientRule rule, ScalarLaw law) {
  ProcessSpec s;
  s.family = LinearFamily{std::move(rule), PostMap::identity()};
  s.innovation = law;
  return s;
}

ProcessSpec ma1_uniform() {
  return linear(CoefficientRule::explicit_list({1.0, 0.5}), ScalarLaw::unit_uniform());
}

ProcessSpec recursion_uniform() {
  ProcessSpec s;
  s.family = RecursionFamily{ScalarLaw::constant(0.5), ScalarLaw::unit_uniform(), true};
  return s;
}

std::vector<std::size_t> rate_grid() {
  std::vector<std::size_t> g;
  for (int e = 7; e <= 13; ++e) g.push_back(std::size_t{1} << e);
  return g;
}

const Executor& executor() {
  static const Executor ex(std::max(1u, std::thread::hardware_concurrency()));
  return ex;
}

// Ordinary least squares slope over every point, reported for context only.
double raw_slope(const RateSeries& s) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(s.points.size());
  for (const auto& p : s.points) {
    const double x = std::log(p.n), y = std::log(std::max(p.value, 1e-300));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

Outcome rate_outcome(const ProcessSpec& spec, const std::string& label) {
  const Process p(spec);
  auto series = rate_sweep(p, StatisticKind::kolmogorov, rate_grid(), kRateR, Seed64{kSeed},
                           SweepOptions{}, executor());
  FitOptions fo;
  fo.tolerance = kSlopeTol;
  const auto fit = fit_rate(series, fo);
  std::ostringstream d;
  d << label << ": verdict " << to_string(fit.verdict) << ", " << fit.used_points
    << "/" << series.points.size() << " points above 3*DKW";
  if (fit.fitted) d << ", slope " << fmt(fit.slope);
  d << ", raw slope " << fmt(raw_slope(series)) << ", D(128) " << fmt(series.points.front().value)
    << ", D(8192) " << fmt(series.points.back().value) << ", floor " << fmt(series.points.front().floor);
  const bool pass = fit.fitted && std::abs(fit.slope - kSlopeTarget) <= kSlopeTol;
  return {pass, d.str()};
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  ProcessSpec spec = linear(CoefficientRule::explicit_list({1.0}), ScalarLaw::rademacher());
  const Process p(spec);
  bool all = true;
  std::ostringstream d;
  for (int n : {4, 16, 36}) {
    const auto nn = static_cast<std::size_t>(n);
    const auto samples =
        standardize(sample_sums(p, nn, kOracleR, derive_seed(Seed64{kSeed}, nn), executor()), nn,
                    1.0, "analytic-sn2");
    const auto emp = empirical_kolmogorov(samples);
    const double exact = exact_kolmogorov_rademacher(n);
    const double gap = std::abs(emp.distance - exact);
    all = all && gap <= emp.dkw;
    d << "n=" << n << " |emp-exact|=" << fmt(gap) << " ";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double dkw = std::sqrt(std::log(200.0) / (2.0 * kOracleR));
  d << "dkw=" << fmt(dkw) << " time=" << fmt(secs) << "s";
  return {all && secs < kOracleSeconds, d.str()};
}

Outcome criterion2() {
  return rate_outcome(linear(CoefficientRule::explicit_list({1.0}), ScalarLaw::unit_uniform()),
                      "iid uniform");
}

Outcome criterion3() {
  const auto a = rate_outcome(ma1_uniform(), "MA(1)");
  const auto b = rate_outcome(recursion_uniform(), "recursion");
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Outcome criterion4() {
  const Process ma(linear(CoefficientRule::explicit_list({1.0, 0.5}), ScalarLaw::standard_normal()));
  const auto table = autocovariance(ma, 4, 0, Seed64{kSeed});
  double worst_sigma = 0.0, worst_sn = 0.0;
  for (long long m = 1; m <= 64; ++m) {
    const auto s = sigma_hat_m(table, m);
    worst_sigma = std::max(worst_sigma, std::abs(s.identity - s.double_sum));
  }
  for (long long n = 1; n <= 256; ++n) {
    // direct expansion sum_{|k|<n} (n - |k|) gamma(k) / n, computed here
    double direct = table.at(0) * n;
    for (long long k = 1; k < n; ++k) direct += 2.0 * double(n - k) * table.at(k);
    direct /= double(n);
    worst_sn = std::max(worst_sn, std::abs(finite_n_variance(table, n).identity_minus - direct));
  }
  const Process rec(recursion_uniform());
  const double eb2 = 1.0, ea = 0.5, ea2 = 0.25;
  const double closed = eb2 / (1.0 - ea2) * (1.0 + 2.0 * ea / (1.0 - ea));
  const auto mc = long_run_variance(monte_carlo_autocovariance(
      rec, 4 * rec.window(), kVarianceR, Seed64{kSeed}, executor()));
  const double z = std::abs(mc.s2 - closed) / mc.se;
  std::ostringstream d;
  d << "max|sigma_hat identity|=" << fmt(worst_sigma) << " max|s_n^2 identity|=" << fmt(worst_sn)
    << " recursion s2 closed=" << fmt(closed) << " mc=" << fmt(mc.s2) << " z=" << fmt(z);
  return {worst_sigma <= kIdentityTol && worst_sn <= kIdentityTol && z <= kSe, d.str()};
}

Outcome criterion5() {
  const Process p(linear(CoefficientRule::geometric(0.5), ScalarLaw::standard_normal()));
  std::vector<int> lags;
  for (int l = 1; l <= 12; ++l) lags.push_back(l);
  const auto prof = dependence_profile(p, 2.0, lags, kProfileR, Seed64{kSeed}, executor());
  double worst = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double truth = std::sqrt(2.0) * std::pow(0.5, lags[i]);
    worst = std::max(worst, std::abs(prof.delta_hat[i] - truth) / prof.se[i]);
  }
  const auto fit = decay_fit(prof);
  const auto rep = summability_report(prof, fit);
  std::ostringstream d;
  d << "max z=" << fmt(worst) << " rho_hat=" << fmt(fit.parameter) << " class "
    << to_string(fit.kind) << " verdict " << to_string(rep.verdict);
  const bool pass = worst <= kSe && fit.kind == DecayFit::Kind::geometric &&
                    std::abs(fit.parameter - 0.5) <= kRhoTol &&
                    rep.verdict == Summability::summable;
  return {pass, d.str()};
}

Outcome criterion6() {
  const Process p(linear(CoefficientRule::explicit_list({1.0, 0.5}), ScalarLaw::standard_normal()));
  const auto d = decompose(p, make_plan(90, 10, 0.5), kBlockR, kBlockT, Seed64{kSeed}, executor());
  std::ostringstream s;
  s << "s2_nm=" << fmt(d.s2_nm.value) << " sigma_bar2+varsigma_bar2="
    << fmt(d.sigma_bar2.value + d.varsigma_bar2.value) << " residual=" << fmt(d.residual.value)
    << " se=" << fmt(d.residual.se) << " additivity=" << fmt(d.max_additivity_error);
  return {std::abs(d.residual.value) <= kSe * d.residual.se &&
              d.max_additivity_error <= kIdentityTol,
          s.str()};
}

Outcome criterion7() {
  const Process p(linear(CoefficientRule::geometric(0.5), ScalarLaw::standard_normal()));
  bool pass = true;
  double prev = INFINITY;
  std::ostringstream d;
  for (int m : {2, 4, 8}) {
    const double truth = std::pow(0.5, m) / std::sqrt(0.75);
    const auto r = residual_norm(p, m, 2.0, kResidualT, kResidualR, Seed64{kSeed}, true, executor());
    const double z = std::abs(r.corrected.value - truth) / r.corrected.se;
    pass = pass && z <= kSe && r.corrected.value < prev;
    prev = r.corrected.value;
    d << "m=" << m << " mc=" << fmt(r.corrected.value) << " exact=" << fmt(truth) << " z=" << fmt(z)
      << " ";
  }
  return {pass, d.str()};
}

Outcome criterion8() {
  const Process p(ma1_uniform());
  SweepOptions opt;
  opt.q = 1.0;
  auto series = rate_sweep(p, StatisticKind::moment_gap, {64, 256, 1024, 4096}, kMomentR,
                           Seed64{kSeed}, opt, executor());
  bool monotone = true;
  for (std::size_t i = 1; i < series.points.size(); ++i) {
    const auto &a = series.points[i - 1], &b = series.points[i];
    monotone = monotone && b.value <= a.value + 2.0 * std::hypot(a.se, b.se);
  }
  const auto fit = fit_rate(series);
  std::ostringstream d;
  d << "gaps";
  for (const auto& pt : series.points) d << " " << fmt(pt.value) << "(se " << fmt(pt.se) << ")";
  d << " monotone=" << (monotone ? "yes" : "no") << " verdict " << to_string(fit.verdict);
  if (fit.fitted) d << " slope " << fmt(fit.slope);
  d << " raw slope " << fmt(raw_slope(series));
  return {monotone && fit.fitted && fit.slope <= kMomentSlopeMax, d.str()};
}

Outcome criterion9() {
  const Process p(ma1_uniform());
  std::vector<double> maxima, refs;
  std::ostringstream d;
  for (std::size_t n : {64, 256, 1024}) {
    const auto norm = finite_variance_normalizer(p, static_cast<long long>(n), 0, Seed64{kSeed});
    const auto samples =
        standardize(sample_sums(p, n, kShapeR, derive_seed(Seed64{kSeed}, n), executor()), n,
                    norm.value, norm.source);
    const auto prof = nonuniform_profile(samples, 3.0, default_nonuniform_grid());
    const double ln = std::log(double(n));
    maxima.push_back(prof.max);
    refs.push_back(std::pow(double(n), -0.5) * std::pow(ln, 1.5));
  }
  const double c = maxima[0] / refs[0];
  bool pass = true;
  const std::size_t ns[] = {64, 256, 1024};
  for (std::size_t i = 0; i < maxima.size(); ++i) {
    const double ratio = maxima[i] / (c * refs[i]);
    pass = pass && ratio <= kShapeFactor && ratio >= 1.0 / kShapeFactor;
    d << "n=" << ns[i] << " max=" << fmt(maxima[i]) << " ratio=" << fmt(ratio) << " ";
  }
  return {pass, d.str()};
}

std::map<std::string, std::string> bundle(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "run_meta.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

Outcome criterion10() {
  const std::vector<std::string> configs = {
      "experiment = distance-report\nseed = 3\nreplications = 20000\n[process]\nfamily = garch\n"
      "alpha = 0.2\nbeta = 0.1\n[distance]\nn = 64\n",
      "experiment = block-identities\nseed = 4\nreplications = 2000\n[process]\n"
      "coefficients = explicit(1, 0.5)\n",
      "experiment = dependence-profile\nseed = 5\nreplications = 5000\n[process]\n"
      "family = volterra\n[dependence]\np = 3\nlags = 0..6\n",
      "experiment = rate-sweep\nseed = 6\nreplications = 4000\n[process]\nfamily = recursion\n"
      "b = uniform(-1, 1)\n[rate]\nstatistic = lq\nn = 8,16,32,64\nnormalizer_replications = 500\n"};
  const fs::path root = fs::temp_directory_path() / "shiftlab_acceptance_determinism";
  bool pass = true;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto cfg = Config::parse(configs[i]);
    std::vector<std::map<std::string, std::string>> runs;
    for (unsigned workers : {1u, 1u, 8u}) {
      const fs::path dir = root / (std::to_string(i) + "_" + std::to_string(runs.size()));
      fs::remove_all(dir);
      const auto out = run(cfg, {dir, workers});
      pass = pass && (out.exit_code == exit_ok || out.exit_code == exit_underpowered);
      runs.push_back(bundle(dir));
    }
    pass = pass && runs[0] == runs[1] && runs[0] == runs[2] && runs[0].size() >= 3;
    compared += runs[0].size();
  }
  return {pass, std::to_string(configs.size()) + " configs, " + std::to_string(compared) +
                    " payload files compared across runs and workers 1 vs 8"};
}

Outcome criterion11() {
  struct Case {
    std::string config;
    std::string rule;
    int exit;
  };
  const std::vector<Case> cases = {
      {"[process]\nfamily = garch\nalpha = 0.6\nbeta = 0.6\n", "garch-stationarity", exit_validation},
      {"[process]\nfamily = recursion\na = constant(1)\n", "recursion-contraction", exit_validation},
      {"experiment = block-identities\n[process]\ncoefficients = explicit(1, 0.5)\n"
       "[blocks]\nn = 4096\nlambda = 0.5\np = 3\n",
       "lambda-range", exit_validation},
      {"experiment = block-identities\n[process]\ncoefficients = explicit(1, 0.5)\n"
       "[blocks]\nn = 100\nm = 10\nc0 = 0.5\n",
       "block-plan-infeasible", exit_gate},
  };
  bool pass = true;
  std::ostringstream d;
  for (const auto& c : cases) {
    const auto out = run(Config::parse(c.config), {fs::temp_directory_path() / "shiftlab_acc_v", 1});
    const bool ok = out.exit_code == c.exit && out.summary.find(c.rule) != std::string::npos;
    pass = pass && ok;
    d << c.rule << "->" << out.exit_code << (ok ? "" : "(unexpected)") << " ";
  }
  return {pass, d.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-11)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "oracle agreement", criterion1},
      {2, "kolmogorov rate, iid uniform", criterion2},
      {3, "kolmogorov rate, MA(1) and recursion", criterion3},
      {4, "variance identities", criterion4},
      {5, "dependence diagnostics", criterion5},
      {6, "block identity", criterion6},
      {7, "approximation bound", criterion7},
      {8, "moment convergence", criterion8},
      {9, "nonuniform shape", criterion9},
      {10, "determinism", criterion10},
      {11, "validation matrix", criterion11},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
