#include "shiftlab/innovations.hpp"

#include <cmath>
#include <limits>

#include "shiftlab/error.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/philox.hpp"
#include "shiftlab/text.hpp"

namespace shiftlab {

Seed64 derive_seed(Seed64 seed, std::uint64_t tag) noexcept {
  return Seed64{seed.value ^ mix64(tag ^ 0x5DEECE66Dull)};
}

ScalarLaw ScalarLaw::uniform(double a, double b) {
  if (!(a < b)) throw ConfigError("uniform-bounds", "uniform(a,b) needs a < b");
  ScalarLaw law;
  law.kind = LawKind::uniform;
  law.lo = a;
  law.hi = b;
  return law;
}

ScalarLaw ScalarLaw::rademacher() {
  ScalarLaw law;
  law.kind = LawKind::rademacher;
  return law;
}

ScalarLaw ScalarLaw::bernoulli(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw ConfigError("bernoulli-probability", "bernoulli(q) needs 0 < q < 1");
  ScalarLaw law;
  law.kind = LawKind::bernoulli;
  law.prob = q;
  return law;
}

ScalarLaw ScalarLaw::constant(double c) {
  ScalarLaw law;
  law.kind = LawKind::constant;
  law.value = c;
  return law;
}

ScalarLaw ScalarLaw::unit_uniform() {
  const double r = std::sqrt(3.0);
  return uniform(-r, r);
}

ScalarLaw ScalarLaw::parse(std::string_view text) {
  const auto term = text::parse_call(text);
  auto want = [&](std::size_t count) {
    if (term.args.size() != count)
      throw ConfigError("syntax", "law '" + term.name + "' takes " +
                                      std::to_string(count) + " argument(s)");
  };
  if (term.name == "normal" || term.name == "standard-normal") {
    want(0);
    return standard_normal();
  }
  if (term.name == "uniform") {
    want(2);
    return uniform(term.args[0], term.args[1]);
  }
  if (term.name == "unit-uniform") {
    want(0);
    return unit_uniform();
  }
  if (term.name == "rademacher") {
    want(0);
    return rademacher();
  }
  if (term.name == "bernoulli") {
    want(1);
    return bernoulli(term.args[0]);
  }
  if (term.name == "constant") {
    want(1);
    return constant(term.args[0]);
  }
  throw ConfigError("unknown-law", "unknown distribution '" + term.name + "'");
}

std::string ScalarLaw::to_string() const {
  switch (kind) {
    case LawKind::standard_normal: return "normal";
    case LawKind::uniform:
      return "uniform(" + text::format_real(lo) + ", " + text::format_real(hi) + ")";
    case LawKind::rademacher: return "rademacher";
    case LawKind::bernoulli: return "bernoulli(" + text::format_real(prob) + ")";
    case LawKind::constant: return "constant(" + text::format_real(value) + ")";
  }
  return "?";
}

double ScalarLaw::from_uniform(double u) const noexcept {
  switch (kind) {
    case LawKind::standard_normal: return numeric::normal_quantile(u);
    case LawKind::uniform: return lo + (hi - lo) * u;
    case LawKind::rademacher: return u < 0.5 ? -1.0 : 1.0;
    case LawKind::bernoulli: return u < prob ? 1.0 : 0.0;
    case LawKind::constant: return value;
  }
  return 0.0;
}

double ScalarLaw::mean() const {
  switch (kind) {
    case LawKind::standard_normal: return 0.0;
    case LawKind::uniform: return lo == -hi ? 0.0 : 0.5 * (lo + hi);
    case LawKind::rademacher: return 0.0;
    case LawKind::bernoulli: return prob;
    case LawKind::constant: return value;
  }
  return 0.0;
}

double ScalarLaw::second_moment() const {
  switch (kind) {
    case LawKind::standard_normal: return 1.0;
    case LawKind::uniform: return (lo * lo + lo * hi + hi * hi) / 3.0;
    case LawKind::rademacher: return 1.0;
    case LawKind::bernoulli: return prob;
    case LawKind::constant: return value * value;
  }
  return 0.0;
}

double ScalarLaw::fourth_moment() const {
  switch (kind) {
    case LawKind::standard_normal: return 3.0;
    case LawKind::uniform:
      return (std::pow(hi, 5) - std::pow(lo, 5)) / (5.0 * (hi - lo));
    case LawKind::rademacher: return 1.0;
    case LawKind::bernoulli: return prob;
    case LawKind::constant: return std::pow(value, 4);
  }
  return 0.0;
}

double ScalarLaw::abs_moment(double p) const {
  switch (kind) {
    case LawKind::standard_normal: return numeric::gaussian_abs_moment(p);
    case LawKind::uniform: {
      // integral of |x|^p over [lo, hi] via the odd antiderivative
      auto F = [p](double x) {
        return std::copysign(std::pow(std::abs(x), p + 1.0) / (p + 1.0), x);
      };
      return (F(hi) - F(lo)) / (hi - lo);
    }
    case LawKind::rademacher: return 1.0;
    case LawKind::bernoulli: return prob;
    case LawKind::constant: return std::pow(std::abs(value), p);
  }
  return 0.0;
}

double ScalarLaw::lp_norm(double p) const { return std::pow(abs_moment(p), 1.0 / p); }

double ScalarLaw::moment_order_available() const {
  return std::numeric_limits<double>::infinity();
}

DistributionSpec DistributionSpec::pair(ScalarLaw first, ScalarLaw second,
                                        bool independent) {
  return {{first, second}, !independent};
}

DistributionSpec DistributionSpec::block(ScalarLaw law, std::size_t width) {
  if (width == 0) throw ConfigError("block-width", "block innovation width must be >= 1");
  return {std::vector<ScalarLaw>(width, law), false};
}

namespace {

// Two consecutive indices share one Philox block: index i uses half (i & 1) of
// the 128-bit output of counter (zigzag(i >> 1), stream, component).
inline Philox4x32::Counter philox_block(Seed64 seed, StreamId id,
                                        std::int64_t pair_index,
                                        std::uint32_t component) noexcept {
  const std::uint64_t z = zigzag(pair_index);
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(z),
                                static_cast<std::uint32_t>(z >> 32),
                                static_cast<std::uint32_t>(id), component};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed.value),
                            static_cast<std::uint32_t>(seed.value >> 32)};
  return Philox4x32::apply(ctr, key);
}

inline double half_to_uniform(const Philox4x32::Counter& out, std::int64_t index) noexcept {
  const std::size_t h = static_cast<std::size_t>(index & 1) * 2;
  const std::uint64_t bits = (std::uint64_t{out[h]} << 32) | out[h + 1];
  return bits_to_open_unit(bits);
}

}  // namespace

double draw_uniform(Seed64 seed, StreamId id, std::int64_t index,
                    std::uint32_t component) noexcept {
  return half_to_uniform(philox_block(seed, id, index >> 1, component), index);
}

double draw(const InnovationStream& stream, std::int64_t index,
            std::uint32_t component) noexcept {
  const ScalarLaw& law = stream.dist.components[component];
  if (law.kind == LawKind::constant) return law.value;
  const std::uint32_t source = stream.dist.shared_uniform ? 0u : component;
  return law.from_uniform(draw_uniform(stream.seed, stream.id, index, source));
}

void fill(const InnovationStream& stream, std::int64_t first, std::size_t count,
          std::span<double> out) {
  const std::size_t dim = stream.dist.dimension();
  if (out.size() < count * dim)
    throw std::invalid_argument("fill: output span too small");
  for (std::size_t c = 0; c < dim; ++c) {
    const ScalarLaw& law = stream.dist.components[c];
    if (law.kind == LawKind::constant) {
      for (std::size_t i = 0; i < count; ++i) out[i * dim + c] = law.value;
      continue;
    }
    const auto source = static_cast<std::uint32_t>(stream.dist.shared_uniform ? 0 : c);
    std::int64_t cached_pair = std::numeric_limits<std::int64_t>::min();
    Philox4x32::Counter block{};
    for (std::size_t i = 0; i < count; ++i) {
      const std::int64_t index = first + static_cast<std::int64_t>(i);
      const std::int64_t pair_index = index >> 1;
      if (pair_index != cached_pair) {
        block = philox_block(stream.seed, stream.id, pair_index, source);
        cached_pair = pair_index;
      }
      out[i * dim + c] = law.from_uniform(half_to_uniform(block, index));
    }
  }
}

SwapPlan SwapPlan::single(std::int64_t l) {
  if (l < 0) throw ConfigError("swap-lag", "swap lag must be >= 0");
  return {Mode::single, l, StreamId::primed};
}

SwapPlan SwapPlan::tail_from(std::int64_t l) {
  if (l < 0) throw ConfigError("swap-lag", "swap lag must be >= 0");
  return {Mode::tail_from, l, StreamId::primed};
}

double coupled_draw(const InnovationStream& base, const InnovationStream& primed,
                    const SwapPlan& plan, std::int64_t k, std::int64_t depth,
                    std::uint32_t component) {
  if (!(base.dist == primed.dist))
    throw ConfigError("coupling-distribution",
                      "base and primed streams must share one distribution");
  if (base.id == primed.id)
    throw ConfigError("coupling-stream-id", "base and primed streams need distinct ids");
  return plan.swaps(depth) ? draw(primed, k - depth, component)
                           : draw(base, k - depth, component);
}

}  // namespace shiftlab
