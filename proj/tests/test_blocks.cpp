#include <doctest.h>

#include <cmath>

#include "shiftlab/blocks.hpp"
#include "shiftlab/error.hpp"

using namespace shiftlab;

namespace {

ProcessSpec linear(CoefficientRule rule, ScalarLaw law = ScalarLaw::standard_normal()) {
  ProcessSpec s;
  s.family = LinearFamily{std::move(rule), PostMap::identity()};
  s.innovation = law;
  return s;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  for (const auto& x : v)
    if (x.rule == rule) return true;
  return false;
}

}  // namespace

TEST_SUITE("blocks") {

TEST_CASE("plan arithmetic") {
  const auto p = make_plan(90, 10, 0.5);
  CHECK(p.N == 5);
  CHECK(p.m_prime == 10);
  CHECK(2 * (p.N - 1) * p.m + p.m_prime == 90);
  CHECK_THROWS_AS(make_plan(100, 10, 0.5), GateError);
  CHECK(has_rule(validate_plan(100, 10, 0.5), "block-plan-infeasible"));
  CHECK(has_rule(validate_plan(90, 10, 0.0), "block-fraction"));
  CHECK(has_rule(validate_plan(15, 10, 0.5), "block-length"));
}

TEST_CASE("plan invariants over a grid") {
  for (long long n = 30; n <= 400; n += 7)
    for (long long m = 2; 2 * m < n && m <= 40; ++m) {
      if (!validate_plan(n, m, 0.5).empty()) continue;
      const auto p = make_plan(n, m, 0.5);
      CHECK(2 * (p.N - 1) * p.m + p.m_prime == n);
      CHECK(p.m_prime <= p.m);
      CHECK(double(p.m_prime) >= 0.5 * double(p.m));
    }
}

TEST_CASE("rate-driven plan") {
  const auto p = make_rate_plan(4096, 3.0, 0.375, 0.5);
  CHECK(p.N == 22);
  CHECK(2 * (p.N - 1) * p.m + p.m_prime == 4096);
  CHECK(p.m_prime <= p.m);
  CHECK(double(p.m_prime) >= 0.5 * double(p.m));
  CHECK(p.m == 96);
  CHECK(has_rule(validate_lambda(0.5, 3.0), "lambda-range"));
  CHECK(validate_lambda(0.375, 3.0).empty());
  CHECK_THROWS_AS(make_rate_plan(4096, 3.0, 0.5, 0.5), ConfigError);
}

TEST_CASE("conditioning pattern") {
  // m = 3: indices 1..3 free, 4..6 fixed, 7..9 free, and everything <= -3 free
  CHECK(free_under_conditioning(1, 3));
  CHECK(free_under_conditioning(3, 3));
  CHECK_FALSE(free_under_conditioning(4, 3));
  CHECK_FALSE(free_under_conditioning(6, 3));
  CHECK(free_under_conditioning(7, 3));
  CHECK_FALSE(free_under_conditioning(0, 3));
  CHECK_FALSE(free_under_conditioning(-2, 3));
  CHECK(free_under_conditioning(-3, 3));
}

TEST_CASE("MA(1) is its own m-approximation") {
  const Process p(linear(CoefficientRule::explicit_list({1.0, 0.5})));
  const auto a = m_approx(p, 20, 2, 8, Seed64{1});
  for (double r : a.residual) CHECK(r == 0.0);
  const auto forced = m_approx(p, 20, 2, 8, Seed64{1}, true);
  for (std::size_t k = 0; k < 20; ++k) CHECK(std::abs(forced.residual[k]) <= 1e-12);
  const auto err = approximation_error(p, 64, 2, 2.0, 500, 4, Seed64{2}, 0.1, 2.25);
  CHECK(err.scaled_norm.value == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK(err.tail_probability.value == 0.0);
}

TEST_CASE("residual norm closed form") {
  const Process p(linear(CoefficientRule::geometric(0.5)));
  double prev = 1e9;
  for (int m : {2, 4, 8}) {
    const double truth = std::pow(0.5, m) / std::sqrt(0.75);
    const auto exact = residual_norm(p, m, 2.0, 16, 20000, Seed64{3});
    CHECK(std::abs(exact.raw.value - truth) <= 3.0 * exact.raw.se);
    const auto mc = residual_norm(p, m, 2.0, 16, 20000, Seed64{3}, true);
    CHECK(std::abs(mc.corrected.value - truth) <= 3.0 * mc.corrected.se);
    CHECK(mc.corrected.value < prev);
    prev = mc.corrected.value;
  }
}

TEST_CASE("approximation error of a geometric filter") {
  // S_n^(>m) = sum_k sum_{i>=m} rho^i eps_{k-i}; variance by direct summation
  const double rho = 0.5;
  const std::size_t n = 256;
  const int m = 8;
  const Process p(linear(CoefficientRule::geometric(rho)));
  const int W = p.window();
  double var = 0.0;
  for (long long j = 1 - W; j <= static_cast<long long>(n); ++j) {
    double c = 0.0;
    for (long long k = 1; k <= static_cast<long long>(n); ++k) {
      const long long i = k - j;
      if (i >= m && i <= W) c += std::pow(rho, double(i));
    }
    var += c * c;
  }
  const double truth = std::sqrt(var / double(n));
  const auto e8 = approximation_error(p, n, m, 2.0, 4000, 4, Seed64{4}, 0.01, 4.0);
  CHECK(std::abs(e8.scaled_norm.value - truth) <= 3.0 * e8.scaled_norm.se);
  const auto e16 = approximation_error(p, n, 16, 2.0, 4000, 4, Seed64{4}, 0.01, 4.0);
  CHECK(e16.scaled_norm.value < e8.scaled_norm.value);
}

TEST_CASE("i.i.d. decomposition") {
  const Process p(linear(CoefficientRule::explicit_list({1.0})));
  const auto d = decompose(p, make_plan(90, 10, 0.5), 2000, 4, Seed64{5});
  // F_m fixes the innovations of blocks 11..20, 31..40, 51..60, 71..80, so
  // E[X_k | F_m] = X_k there and 0 elsewhere.
  CHECK(std::abs(d.varsigma_bar2.value - 40.0 / 90.0) <= 3.0 * d.varsigma_bar2.se);
  CHECK(std::abs(d.sigma_bar2.value - 50.0 / 90.0) <= 3.0 * d.sigma_bar2.se);
  for (const auto& e : d.sigma_j2) CHECK(std::abs(e.value - 0.5) <= 4.0 * e.se);
  CHECK(std::abs(d.residual.value) <= 3.0 * d.residual.se + 1e-12);
  CHECK(d.max_additivity_error <= 1e-12);
}

TEST_CASE("MA(1) block identity") {
  const Process p(linear(CoefficientRule::explicit_list({1.0, 0.5})));
  const auto d = decompose(p, make_plan(90, 10, 0.5), 4000, 16, Seed64{6});
  CHECK(std::abs(d.residual.value) <= 3.0 * d.residual.se);
  CHECK(d.max_additivity_error <= 1e-12);
  for (double v : d.sigma_jm2) CHECK(v >= 0.0);
  // Y_j = (1 + theta) sum of the m free innovations of block j, so
  // sigma_j^2 = (1 + theta)^2 / 2; the last block loses theta eps_n to X_{n+1} = 0.
  REQUIRE(d.sigma_j2.size() == 5);
  for (std::size_t j = 0; j + 1 < d.sigma_j2.size(); ++j)
    CHECK(std::abs(d.sigma_j2[j].value - 1.125) <= 4.0 * d.sigma_j2[j].se);
  CHECK(std::abs(d.sigma_j2.back().value - (9.0 * 2.25 + 1.0) / 20.0) <= 4.0 * d.sigma_j2.back().se);
}

TEST_CASE("block variances approach sigma_hat") {
  const double s2 = 2.25, g1 = 0.5;
  const Process p(linear(CoefficientRule::explicit_list({1.0, 0.5})));
  for (long long m : {4, 8, 16}) {
    const auto d = decompose(p, make_plan(2 * 3 * m + m, m, 0.5), 1000, 16, Seed64{7});
    const double sigma_hat = s2 / 2.0 - g1 / double(m);
    for (const auto& e : d.sigma_j2)
      CHECK(std::abs(e.value - sigma_hat) <= 2.0 * g1 / double(m) + 4.0 * e.se);
  }
}

TEST_CASE("non m-dependent process is refused") {
  const Process p(linear(CoefficientRule::geometric(0.9)));
  CHECK_THROWS_AS(decompose(p, make_plan(90, 10, 0.5), 100, 4, Seed64{1}), GateError);
}

TEST_CASE("decomposition is independent of the worker count") {
  const Process p(linear(CoefficientRule::explicit_list({1.0, 0.5})));
  const auto a = decompose(p, make_plan(90, 10, 0.5), 300, 4, Seed64{8}, Executor{1});
  const auto b = decompose(p, make_plan(90, 10, 0.5), 300, 4, Seed64{8}, Executor{3});
  CHECK(a.sigma_jm2 == b.sigma_jm2);
  CHECK(a.residual.value == b.residual.value);
}

}
