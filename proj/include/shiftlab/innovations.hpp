#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shiftlab {

/// 64-bit seed. Equal seeds give bit-identical streams.
struct Seed64 {
  std::uint64_t value = 0;

  friend bool operator==(Seed64, Seed64) = default;
};

/// Deterministic child seed: seed XOR hash(tag). Used for per-replication and
/// per-grid-point sub-seeds so that results never depend on scheduling.
Seed64 derive_seed(Seed64 seed, std::uint64_t tag) noexcept;

enum class LawKind { standard_normal, uniform, rademacher, bernoulli, constant };

/// One-dimensional innovation law. Every draw is a quantile transform of a
/// single uniform, which keeps pairs of laws easy to couple.
struct ScalarLaw {
  LawKind kind = LawKind::standard_normal;
  double lo = 0.0;    ///< uniform lower bound
  double hi = 1.0;    ///< uniform upper bound
  double prob = 0.5;  ///< bernoulli success probability
  double value = 0.0; ///< constant value

  static ScalarLaw standard_normal() { return {}; }
  static ScalarLaw uniform(double a, double b);
  static ScalarLaw rademacher();
  static ScalarLaw bernoulli(double q);
  static ScalarLaw constant(double c);
  /// Uniform on [-sqrt(3), sqrt(3)]: mean 0, variance 1.
  static ScalarLaw unit_uniform();

  /// Parses "normal", "uniform(a,b)", "rademacher", "bernoulli(q)",
  /// "constant(c)". Throws ConfigError on malformed input.
  static ScalarLaw parse(std::string_view text);
  std::string to_string() const;

  double from_uniform(double u) const noexcept;

  double mean() const;
  double second_moment() const;
  double fourth_moment() const;
  double variance() const { return second_moment() - mean() * mean(); }
  /// E|X|^p, closed form for every catalog law.
  double abs_moment(double p) const;
  double lp_norm(double p) const;
  /// Largest p with finite p-th moment; every catalog law has all moments.
  double moment_order_available() const;
  bool centered() const { return mean() == 0.0; }
  bool bounded() const { return kind != LawKind::standard_normal; }

  friend bool operator==(const ScalarLaw&, const ScalarLaw&) = default;
};

/// Law of one innovation, possibly vector-valued: one component for scalar
/// shifts, two for (a_k, b_k) recursion pairs, m for block innovations.
struct DistributionSpec {
  std::vector<ScalarLaw> components{ScalarLaw::standard_normal()};
  /// All components driven by one uniform (a comonotone pair) instead of
  /// independent uniforms.
  bool shared_uniform = false;

  static DistributionSpec scalar(ScalarLaw law) { return {{law}, false}; }
  static DistributionSpec pair(ScalarLaw first, ScalarLaw second, bool independent);
  static DistributionSpec block(ScalarLaw law, std::size_t width);

  std::size_t dimension() const noexcept { return components.size(); }

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

/// Stream ids of the base sequence and its independent copies.
enum class StreamId : std::uint32_t { base = 0, primed = 1, double_primed = 2 };

/// Counter-addressed innovation sequence: the value at (index, component) is
/// a pure function of (seed, id, index, component).
struct InnovationStream {
  DistributionSpec dist;
  Seed64 seed;
  StreamId id = StreamId::base;
};

/// Uniform variate behind draw(stream, index, component).
double draw_uniform(Seed64 seed, StreamId id, std::int64_t index,
                    std::uint32_t component) noexcept;

double draw(const InnovationStream& stream, std::int64_t index,
            std::uint32_t component = 0) noexcept;

/// Writes innovations for indices first, first+1, ..., first+count-1 into
/// out[(i - first) * dim + c]. Bitwise equal to repeated draw() calls.
void fill(const InnovationStream& stream, std::int64_t first, std::size_t count,
          std::span<double> out);

/// Which depths of the filter theta_k are served from the primed stream.
struct SwapPlan {
  enum class Mode { none, single, tail_from };

  Mode mode = Mode::none;
  std::int64_t lag = 0;
  StreamId target = StreamId::primed;

  static SwapPlan none() { return {}; }
  /// Replace eps_{k-l} only.
  static SwapPlan single(std::int64_t l);
  /// Replace eps_{k-l}, eps_{k-l-1}, ...
  static SwapPlan tail_from(std::int64_t l);

  bool swaps(std::int64_t depth) const noexcept {
    switch (mode) {
      case Mode::single: return depth == lag;
      case Mode::tail_from: return depth >= lag;
      case Mode::none: break;
    }
    return false;
  }
};

/// Coordinate `depth` of the filter theta_k under `plan`.
double coupled_draw(const InnovationStream& base, const InnovationStream& primed,
                    const SwapPlan& plan, std::int64_t k, std::int64_t depth,
                    std::uint32_t component = 0);

}  // namespace shiftlab
