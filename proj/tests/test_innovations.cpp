#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>
#include <vector>

#include "shiftlab/error.hpp"
#include "shiftlab/innovations.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/philox.hpp"

using namespace shiftlab;

TEST_SUITE("innovations") {

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::apply(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::apply(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("zigzag is a bijection on a window") {
  std::set<std::uint64_t> seen;
  for (std::int64_t i = -500; i <= 500; ++i) seen.insert(zigzag(i));
  CHECK(seen.size() == 1001);
  CHECK(zigzag(0) == 0);
  CHECK(zigzag(-1) == 1);
  CHECK(zigzag(1) == 2);
}

TEST_CASE("unit mapping stays strictly inside (0,1)") {
  CHECK(bits_to_open_unit(0) > 0.0);
  CHECK(bits_to_open_unit(~0ull) < 1.0);
}

TEST_CASE("draw is pure") {
  const InnovationStream s{DistributionSpec::scalar(ScalarLaw::standard_normal()), Seed64{42},
                           StreamId::base};
  const double a = draw(s, 7), b = draw(s, 7);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  CHECK(draw(s, 7) != draw(s, 8));
  CHECK(draw(s, -3) != draw(s, 3));
}

TEST_CASE("streams and seeds give different values") {
  auto dist = DistributionSpec::scalar(ScalarLaw::standard_normal());
  const InnovationStream base{dist, Seed64{1}, StreamId::base};
  const InnovationStream primed{dist, Seed64{1}, StreamId::primed};
  const InnovationStream other{dist, Seed64{2}, StreamId::base};
  CHECK(draw(base, 0) != draw(primed, 0));
  CHECK(draw(base, 0) != draw(other, 0));
  CHECK(derive_seed(Seed64{1}, 0) != derive_seed(Seed64{1}, 1));
  CHECK(derive_seed(Seed64{1}, 5) == derive_seed(Seed64{1}, 5));
}

TEST_CASE("fill matches draw") {
  const InnovationStream s{DistributionSpec::pair(ScalarLaw::uniform(0, 1),
                                                  ScalarLaw::standard_normal(), true),
                           Seed64{9}, StreamId::primed};
  std::vector<double> buf(2 * 50);
  fill(s, -20, 50, buf);
  for (std::int64_t i = -20; i < 30; ++i)
    for (std::uint32_t c = 0; c < 2; ++c)
      CHECK(buf[static_cast<std::size_t>((i + 20) * 2 + c)] == draw(s, i, c));
}

TEST_CASE("rademacher support") {
  const InnovationStream s{DistributionSpec::scalar(ScalarLaw::rademacher()), Seed64{3},
                           StreamId::base};
  for (std::int64_t i = -100; i < 100; ++i) {
    const double v = draw(s, i);
    CHECK((v == 1.0 || v == -1.0));
  }
}

TEST_CASE("standard normal law of large numbers") {
  const InnovationStream s{DistributionSpec::scalar(ScalarLaw::standard_normal()), Seed64{11},
                           StreamId::base};
  const std::size_t R = 1000000;
  std::vector<double> x(R);
  fill(s, 0, R, x);
  double m = 0, v = 0;
  for (double y : x) m += y;
  m /= R;
  for (double y : x) v += (y - m) * (y - m);
  v /= (R - 1);
  CHECK(std::abs(m) <= 4.0 / std::sqrt(static_cast<double>(R)));
  CHECK(std::abs(v - 1.0) <= 0.01);
}

TEST_CASE("law moments against numeric integration") {
  // E|X|^p by quadrature of the quantile function over (0,1).
  auto quad = [](const ScalarLaw& law, double p) {
    return numeric::integrate([&](double u) { return std::pow(std::abs(law.from_uniform(u)), p); },
                              0.0, 1.0, 4096, 10);
  };
  const auto normal = ScalarLaw::standard_normal();
  CHECK(normal.abs_moment(3.0) == doctest::Approx(2.0 * std::sqrt(2.0 / numeric::kPi)).epsilon(1e-12));
  CHECK(normal.abs_moment(3.0) == doctest::Approx(quad(normal, 3.0)).epsilon(1e-4));
  const auto uni = ScalarLaw::uniform(-1.0, 1.0);
  CHECK(uni.abs_moment(3.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(uni.variance() == doctest::Approx(1.0 / 3.0));
  CHECK(ScalarLaw::unit_uniform().variance() == doctest::Approx(1.0));
  const auto bern = ScalarLaw::bernoulli(0.3);
  CHECK(bern.abs_moment(2.5) == doctest::Approx(quad(bern, 2.5)).epsilon(1e-4));
  CHECK(ScalarLaw::rademacher().fourth_moment() == doctest::Approx(1.0));
}

TEST_CASE("centering flags") {
  CHECK(ScalarLaw::standard_normal().centered());
  CHECK(ScalarLaw::rademacher().centered());
  CHECK(ScalarLaw::uniform(-2, 2).centered());
  CHECK_FALSE(ScalarLaw::uniform(0, 1).centered());
  CHECK_FALSE(ScalarLaw::bernoulli(0.5).centered());
}

TEST_CASE("law parsing round trip") {
  for (const char* text : {"normal", "rademacher", "uniform(-1, 1)", "bernoulli(0.25)",
                           "constant(0.5)"}) {
    const auto law = ScalarLaw::parse(text);
    CHECK(ScalarLaw::parse(law.to_string()) == law);
  }
  CHECK_THROWS_AS(ScalarLaw::parse("cauchy"), ConfigError);
  CHECK_THROWS_AS(ScalarLaw::parse("uniform(1)"), ConfigError);
  CHECK_THROWS_AS(ScalarLaw::parse("bernoulli(1.5)"), ConfigError);
}

TEST_CASE("coupled draw follows the swap plan") {
  auto dist = DistributionSpec::scalar(ScalarLaw::standard_normal());
  const InnovationStream base{dist, Seed64{5}, StreamId::base};
  const InnovationStream primed{dist, Seed64{6}, StreamId::primed};
  const auto plan = SwapPlan::single(3);
  for (std::int64_t j = 0; j < 8; ++j) {
    const double v = coupled_draw(base, primed, plan, 10, j);
    if (j == 3)
      CHECK(v == draw(primed, 10 - j));
    else
      CHECK(v == draw(base, 10 - j));
  }
  const auto tail = SwapPlan::tail_from(2);
  CHECK(coupled_draw(base, primed, tail, 0, 1) == draw(base, -1));
  CHECK(coupled_draw(base, primed, tail, 0, 5) == draw(primed, -5));
}

TEST_CASE("independent copy difference has second moment 2") {
  auto dist = DistributionSpec::scalar(ScalarLaw::standard_normal());
  const std::size_t R = 100000;
  std::vector<double> d(R);
  for (std::size_t r = 0; r < R; ++r) {
    const Seed64 sr = derive_seed(Seed64{21}, r);
    const InnovationStream base{dist, sr, StreamId::base};
    const InnovationStream primed{dist, sr, StreamId::primed};
    const double diff = coupled_draw(base, primed, SwapPlan::none(), 0, 0) -
                        coupled_draw(base, primed, SwapPlan::single(0), 0, 0);
    d[r] = diff * diff;
  }
  const auto est = numeric::mean_estimate(d);
  CHECK(std::abs(est.value - 2.0) <= 3.0 * est.se);
}

}
