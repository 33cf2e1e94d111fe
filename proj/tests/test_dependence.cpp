#include <doctest.h>

#include <cmath>
#include <limits>

#include "shiftlab/dependence.hpp"
#include "shiftlab/error.hpp"

using namespace shiftlab;

namespace {

ProcessSpec linear(CoefficientRule rule, PostMap map = PostMap::identity()) {
  ProcessSpec s;
  s.family = LinearFamily{std::move(rule), map};
  return s;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int l = lo; l <= hi; ++l) v.push_back(l);
  return v;
}

}  // namespace

TEST_SUITE("dependence") {

TEST_CASE("i.i.d. profile is exactly zero beyond lag 0") {
  const Process p(linear(CoefficientRule::explicit_list({1.0, 0.0, 0.0, 0.0, 0.0, 0.0})));
  const auto prof = dependence_profile(p, 2.0, range(0, 5), 200, Seed64{1});
  CHECK(prof.delta_hat[0] > 0.0);
  for (std::size_t i = 1; i < prof.lags.size(); ++i) CHECK(prof.delta_hat[i] == 0.0);
  const auto rep = summability_report(prof, std::nullopt);
  CHECK(rep.verdict == Summability::summable);
}

TEST_CASE("geometric profile matches sqrt(2) rho^l") {
  const Process p(linear(CoefficientRule::geometric(0.5)));
  const auto prof = dependence_profile(p, 2.0, range(1, 12), 20000, Seed64{2});
  for (std::size_t i = 0; i < prof.lags.size(); ++i) {
    const double truth = std::sqrt(2.0) * std::pow(0.5, prof.lags[i]);
    CAPTURE(prof.lags[i]);
    CHECK(std::abs(prof.delta_hat[i] - truth) <= 3.0 * prof.se[i]);
    CHECK(prof.se[i] > 0.0);
  }
  for (std::size_t i = 1; i < prof.weighted_partial.size(); ++i)
    CHECK(prof.weighted_partial[i] >= prof.weighted_partial[i - 1]);
  const auto fit = decay_fit(prof);
  CHECK(fit.kind == DecayFit::Kind::geometric);
  CHECK(fit.parameter == doctest::Approx(0.5).epsilon(0.02));
  const auto rep = summability_report(prof, fit);
  CHECK(rep.verdict == Summability::summable);
  double bound = 0.0;
  for (int l = 13; l < 2000; ++l) bound += double(l) * l * std::sqrt(2.0) * std::pow(0.5, l);
  CHECK(rep.tail <= bound * 1.2);
}

TEST_CASE("holder map respects its coupling bound") {
  const double beta = 0.5, c = 3.0;
  const Process p(linear(CoefficientRule::geometric(0.6), PostMap::holder(beta, c)));
  const auto prof = dependence_profile(p, 2.0, range(1, 6), 20000, Seed64{3});
  const double H = p.spec().family.index() == 0
                       ? std::get<LinearFamily>(p.spec().family).map.holder_constant()
                       : 0.0;
  CHECK(H == doctest::Approx(std::pow(2.0, 1.0 - beta)));
  // |f(x) - f(y)| <= H |x - y|^beta with x - y = alpha_l (eps - eps'), ||eps - eps'||_2 = sqrt 2
  for (std::size_t i = 0; i < prof.lags.size(); ++i) {
    const double alpha = std::pow(0.6, prof.lags[i]);
    const double bound = H * std::pow(alpha, beta) * std::pow(std::sqrt(2.0), beta);
    CHECK(prof.delta_hat[i] <= bound + 3.0 * prof.se[i]);
  }
}

TEST_CASE("decay fit on exact inputs") {
  std::vector<double> g, poly;
  for (int l = 1; l <= 12; ++l) {
    g.push_back(2.0 * std::pow(0.7, l));
    poly.push_back(std::pow(double(l), -4.0));
  }
  const auto fg = decay_fit(DependenceProfile::from_values(range(1, 12), g));
  CHECK(fg.kind == DecayFit::Kind::geometric);
  CHECK(fg.parameter == doctest::Approx(0.7).epsilon(1e-10));
  const auto fp = decay_fit(DependenceProfile::from_values(range(1, 12), poly));
  CHECK(fp.kind == DecayFit::Kind::polynomial);
  CHECK(fp.parameter == doctest::Approx(4.0).epsilon(1e-10));
  CHECK_THROWS_AS(decay_fit(DependenceProfile::from_values({1, 2, 3}, {1.0, 0.5, 0.25})),
                  ConfigError);
}

TEST_CASE("harmonic-type profile is not summable") {
  std::vector<double> d;
  for (int l = 1; l <= 20; ++l) d.push_back(1.0 / (double(l) * l));
  const auto prof = DependenceProfile::from_values(range(1, 20), d);
  const auto rep = summability_report(prof, decay_fit(prof));
  CHECK(rep.verdict == Summability::not_summable);
  CHECK(std::isinf(rep.tail));
}

TEST_CASE("all-zero profile") {
  const auto prof = DependenceProfile::from_values(range(1, 8), std::vector<double>(8, 0.0));
  const auto rep = summability_report(prof, std::nullopt);
  CHECK(rep.verdict == Summability::summable);
  CHECK(rep.tail == 0.0);
}

TEST_CASE("recursion contraction shows in the fit") {
  ProcessSpec s;
  s.family = RecursionFamily{ScalarLaw::constant(0.6), ScalarLaw::standard_normal(), true};
  const Process p(s);
  const auto prof = dependence_profile(p, 2.0, range(1, 10), 5000, Seed64{4});
  const auto fit = decay_fit(prof);
  CHECK(fit.kind == DecayFit::Kind::geometric);
  CHECK(std::abs(fit.parameter - 0.6) <= 0.1);
}

TEST_CASE("profile preconditions") {
  const Process p(linear(CoefficientRule::geometric(0.5)));
  CHECK_THROWS_AS(dependence_profile(p, 2.0, {1, 2}, 50, Seed64{1}), ConfigError);
  CHECK_THROWS_AS(dependence_profile(p, 4.0, {1, 2}, 200, Seed64{1}), ConfigError);
  CHECK_THROWS_AS(dependence_profile(p, 2.0, {2, 1}, 200, Seed64{1}), ConfigError);
  CHECK_THROWS_AS(dependence_profile(p, 2.0, {1, 400}, 200, Seed64{1}), ConfigError);
}

TEST_CASE("profile is independent of the worker count") {
  const Process p(linear(CoefficientRule::geometric(0.5)));
  const auto a = dependence_profile(p, 3.0, range(0, 6), 3000, Seed64{5}, Executor{1});
  const auto b = dependence_profile(p, 3.0, range(0, 6), 3000, Seed64{5}, Executor{4});
  CHECK(a.delta_hat == b.delta_hat);
  CHECK(a.se == b.se);
}

}
