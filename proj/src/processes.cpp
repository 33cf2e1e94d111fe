#include "shiftlab/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shiftlab/error.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/text.hpp"

namespace shiftlab {

namespace {

constexpr int kMaxWindow = 1 << 16;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int geometric_window(double rho, double tol) {
  const double r = std::abs(rho);
  if (r == 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tol) / std::log(r))));
}

// Smallest W with c * W^(3-a) / (a-3) <= tol, an upper bound for
// sum_{l>W} l^2 c l^-a.
double polynomial_window(double a, double c, double tol) {
  return std::ceil(std::pow(c / (tol * (a - 3.0)), 1.0 / (a - 3.0)));
}

}  // namespace

CoefficientRule CoefficientRule::geometric(double rho) {
  CoefficientRule r;
  r.kind = Kind::geometric;
  r.rho = rho;
  return r;
}

CoefficientRule CoefficientRule::polynomial(double a, double c) {
  CoefficientRule r;
  r.kind = Kind::polynomial;
  r.exponent = a;
  r.scale = c;
  return r;
}

CoefficientRule CoefficientRule::explicit_list(std::vector<double> values) {
  CoefficientRule r;
  r.kind = Kind::explicit_list;
  r.values = std::move(values);
  return r;
}

double CoefficientRule::coefficient(std::int64_t i) const {
  if (i < 0) return 0.0;
  switch (kind) {
    case Kind::geometric: return std::pow(rho, static_cast<double>(i));
    case Kind::polynomial:
      return scale * std::pow(static_cast<double>(std::max<std::int64_t>(i, 1)), -exponent);
    case Kind::explicit_list:
      return static_cast<std::size_t>(i) < values.size() ? values[static_cast<std::size_t>(i)]
                                                         : 0.0;
  }
  return 0.0;
}

PostMap PostMap::holder(double beta, double c) { return {Kind::holder, beta, c}; }

PostMap PostMap::tanh(double c) { return {Kind::tanh, 1.0, c}; }

double PostMap::apply(double x) const noexcept {
  switch (kind) {
    case Kind::identity: return x;
    case Kind::holder: {
      const double y = std::copysign(std::pow(std::abs(x), beta), x);
      return std::clamp(y, -clip, clip);
    }
    case Kind::tanh: return clip * std::tanh(x / clip);
  }
  return x;
}

double PostMap::holder_exponent() const noexcept {
  return kind == Kind::holder ? beta : 1.0;
}

double PostMap::holder_constant() const noexcept {
  // sign(x)|x|^beta is beta-Hoelder with constant 2^(1-beta); clipping is a
  // contraction and keeps it.
  return kind == Kind::holder ? std::pow(2.0, 1.0 - beta) : 1.0;
}

std::string ProcessSpec::family_name() const {
  return std::visit(Overloaded{[](const LinearFamily&) { return "linear"; },
                               [](const DyadicFamily&) { return "dyadic"; },
                               [](const MDepBlockFamily&) { return "mdep-block"; },
                               [](const RecursionFamily&) { return "recursion"; },
                               [](const GarchFamily&) { return "garch"; },
                               [](const VolterraFamily&) { return "volterra"; }},
                    family);
}

double garch_contraction(const GarchFamily& garch, const ScalarLaw& innovation) {
  const std::size_t r = std::max(garch.alpha.size(), garch.beta.size());
  const double m2 = innovation.second_moment();
  const double m4 = innovation.fourth_moment();
  double gamma = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double a = i < garch.alpha.size() ? garch.alpha[i] : 0.0;
    const double b = i < garch.beta.size() ? garch.beta[i] : 0.0;
    gamma += std::sqrt(a * a + 2.0 * a * b * m2 + b * b * m4);
  }
  return gamma;
}

std::vector<Violation> validate_process(const ProcessSpec& spec) {
  std::vector<Violation> out;
  auto add = [&](std::string rule, std::string path, std::string msg) {
    out.push_back({std::move(rule), std::move(path), std::move(msg)});
  };
  if (!(spec.moment_order > 2.0))
    add("moment-order", "process.moment_order", "moment order p must exceed 2");
  if (!(spec.truncation_tol > 0.0 && spec.truncation_tol < 1.0))
    add("truncation-tolerance", "tolerance.truncation", "tolerance must lie in (0, 1)");
  if (!(spec.scale > 0.0)) add("scale", "process.scale", "scale must be positive");
  if (spec.window && (*spec.window < 0 || *spec.window > kMaxWindow))
    add("window-range", "process.window",
        "window must lie in [0, " + std::to_string(kMaxWindow) + "]");
  if (spec.innovation.moment_order_available() < spec.moment_order)
    add("moment-availability", "process.innovation",
        "innovation lacks the claimed moment order");

  std::visit(
      Overloaded{
          [&](const LinearFamily& f) {
            if (!spec.innovation.centered())
              add("centered-innovation", "process.innovation",
                  "linear processes need E[eps] = 0, got " + spec.innovation.to_string());
            const auto& c = f.coefficients;
            switch (c.kind) {
              case CoefficientRule::Kind::geometric:
                if (!(std::abs(c.rho) < 1.0))
                  add("square-summable", "process.coefficients",
                      "geometric coefficients need |rho| < 1");
                break;
              case CoefficientRule::Kind::polynomial:
                if (!(c.exponent > 0.5))
                  add("square-summable", "process.coefficients",
                      "polynomial coefficients need exponent a > 1/2");
                else if (!spec.window) {
                  if (!(c.exponent > 3.0))
                    add("polynomial-window", "process.window",
                        "the default window rule needs a > 3; set process.window");
                  else if (polynomial_window(c.exponent, std::abs(c.scale),
                                             spec.truncation_tol) > kMaxWindow)
                    add("window-too-large", "process.window",
                        "default polynomial window exceeds " +
                            std::to_string(kMaxWindow) + "; set process.window");
                }
                break;
              case CoefficientRule::Kind::explicit_list:
                if (c.values.empty())
                  add("coefficients-empty", "process.coefficients",
                      "explicit coefficient list is empty");
                break;
            }
            if (f.map.kind == PostMap::Kind::holder &&
                !(f.map.beta > 0.0 && f.map.beta <= 1.0))
              add("holder-exponent", "process.map", "holder exponent must lie in (0, 1]");
            if (f.map.kind != PostMap::Kind::identity && !(f.map.clip > 0.0))
              add("map-constant", "process.map", "map constant must be positive");
          },
          [&](const DyadicFamily& f) {
            if (f.bits < 1 || f.bits > 128)
              add("dyadic-bits", "process.bits", "bit precision J must lie in [1, 128]");
          },
          [&](const MDepBlockFamily& f) {
            if (f.width < 1 || f.width > 4096)
              add("block-width", "process.width", "inner width must lie in [1, 4096]");
            if (f.map == MDepBlockFamily::Map::product && f.width < 2)
              add("block-width", "process.width", "the product map needs width >= 2");
            if (!spec.innovation.centered())
              add("centered-innovation", "process.innovation",
                  "block maps need centered zeta, got " + spec.innovation.to_string());
          },
          [&](const RecursionFamily& f) {
            const double norm = f.a.lp_norm(spec.moment_order);
            if (!(norm < 1.0))
              add("recursion-contraction", "process.a",
                  "need ||a_k||_p < 1 and ||b_k||_p < inf; got ||a||_p = " +
                      text::format_real(norm) + " at p = " +
                      text::format_real(spec.moment_order));
            if (!f.b.centered())
              add("recursion-centered-b", "process.b",
                  "need E[b_k] = 0, got " + f.b.to_string());
          },
          [&](const GarchFamily& f) {
            if (!(f.mu > 0.0)) add("garch-mu", "process.mu", "mu must be positive");
            for (double a : f.alpha)
              if (!(a >= 0.0))
                add("garch-nonnegative", "process.alpha", "alpha_i must be >= 0");
            for (double b : f.beta)
              if (!(b >= 0.0))
                add("garch-nonnegative", "process.beta", "beta_i must be >= 0");
            if (!spec.innovation.centered())
              add("centered-innovation", "process.innovation",
                  "GARCH needs a zero-mean innovation");
            const double gamma = garch_contraction(f, spec.innovation);
            if (!(gamma < 1.0))
              add("garch-stationarity", "process.alpha",
                  "stationarity needs gamma_C < 1, got gamma_C = " + text::format_real(gamma));
          },
          [&](const VolterraFamily& f) {
            if (f.max_order < 1 || f.max_order > 8)
              add("volterra-order", "process.order", "order must lie in [1, 8]");
            if (f.max_lag < 0 || f.max_lag > 4096)
              add("volterra-lag", "process.max_lag", "max lag must lie in [0, 4096]");
            if (!(std::abs(f.rho) < 1.0))
              add("volterra-kernel", "process.kernel", "kernel decay needs |rho| < 1");
            if (!spec.innovation.centered())
              add("centered-innovation", "process.innovation",
                  "Volterra products need centered innovations");
          }},
      spec.family);
  return out;
}

Process::Process(ProcessSpec spec) : spec_(std::move(spec)) {
  const auto violations = validate_process(spec_);
  if (!violations.empty())
    throw ConfigError(violations.front().rule,
                      violations.front().path + ": " + violations.front().message);

  std::visit(
      Overloaded{
          [&](const LinearFamily& f) {
            dist_ = DistributionSpec::scalar(spec_.innovation);
            const auto& c = f.coefficients;
            if (spec_.window) {
              window_ = *spec_.window;
            } else if (c.kind == CoefficientRule::Kind::geometric) {
              window_ = geometric_window(c.rho, spec_.truncation_tol);
            } else if (c.kind == CoefficientRule::Kind::polynomial) {
              window_ = static_cast<int>(
                  polynomial_window(c.exponent, std::abs(c.scale), spec_.truncation_tol));
            } else {
              window_ = static_cast<int>(c.values.size()) - 1;
            }
            depth_ = window_;
            weights_.resize(static_cast<std::size_t>(window_) + 1);
            for (int i = 0; i <= window_; ++i) weights_[i] = c.coefficient(i);
          },
          [&](const DyadicFamily& f) {
            dist_ = DistributionSpec::scalar(ScalarLaw::bernoulli(0.5));
            window_ = f.bits - 1;
            depth_ = window_;
          },
          [&](const MDepBlockFamily& f) {
            dist_ = DistributionSpec::block(spec_.innovation, static_cast<std::size_t>(f.width));
            window_ = 1;
            depth_ = 1;
          },
          [&](const RecursionFamily& f) {
            dist_ = DistributionSpec::pair(f.a, f.b, f.independent);
            window_ = spec_.window ? *spec_.window
                                   : geometric_window(f.a.lp_norm(spec_.moment_order),
                                                      spec_.truncation_tol);
            burn_in_ = 10 * std::max(window_, 1);
            depth_ = burn_in_;
          },
          [&](const GarchFamily& f) {
            dist_ = DistributionSpec::scalar(spec_.innovation);
            window_ = spec_.window ? *spec_.window
                                   : geometric_window(garch_contraction(f, spec_.innovation),
                                                      spec_.truncation_tol);
            burn_in_ = 10 * std::max(window_, 1);
            depth_ = burn_in_;
            double persistence = 0.0;
            for (double a : f.alpha) persistence += a;
            for (double b : f.beta) persistence += b * spec_.innovation.second_moment();
            garch_init_ = persistence < 1.0 ? f.mu / (1.0 - persistence) : f.mu;
          },
          [&](const VolterraFamily& f) {
            dist_ = DistributionSpec::scalar(spec_.innovation);
            window_ = f.max_lag;
            depth_ = window_;
            weights_.resize(static_cast<std::size_t>(window_) + 1);
            for (int j = 0; j <= window_; ++j) weights_[j] = f.c * std::pow(f.rho, j);
          }},
      spec_.family);
}

bool Process::linear_identity() const noexcept {
  const auto* f = std::get_if<LinearFamily>(&spec_.family);
  return f && f->map.kind == PostMap::Kind::identity;
}

double Process::linear_coefficient(std::int64_t i) const {
  if (!std::holds_alternative<LinearFamily>(spec_.family)) return 0.0;
  if (i < 0 || i > window_) return 0.0;
  return spec_.scale * weights_[static_cast<std::size_t>(i)];
}

double Process::evaluate_linear(const LinearFamily& f, const double* theta) const {
  double y = 0.0;
  for (int j = 0; j <= window_; ++j) y += weights_[j] * theta[-j];
  return spec_.scale * f.map.apply(y);
}

namespace {

struct DyadicRegister {
  std::uint64_t hi = 0;  // bits at depths 0..63, depth 0 in the top bit
  std::uint64_t lo = 0;  // bits at depths 64..127
};

std::uint64_t hi_mask(int bits) {
  return bits >= 64 ? ~std::uint64_t{0} : ~std::uint64_t{0} << (64 - bits);
}

std::uint64_t lo_mask(int bits) {
  if (bits <= 64) return 0;
  return bits >= 128 ? ~std::uint64_t{0} : ~std::uint64_t{0} << (128 - bits);
}

double dyadic_map(DyadicFamily::Map map, const DyadicRegister& reg) {
  const double t = std::ldexp(static_cast<double>(reg.hi), -64) +
                   std::ldexp(static_cast<double>(reg.lo), -128);
  switch (map) {
    case DyadicFamily::Map::cosine: return std::cos(2.0 * numeric::kPi * t);
    case DyadicFamily::Map::indicator: return t < 0.5 ? 0.5 : -0.5;
  }
  return 0.0;
}

}  // namespace

double Process::evaluate_dyadic(const DyadicFamily& f, const double* theta) const {
  DyadicRegister reg;
  for (int j = 0; j < f.bits; ++j) {
    if (theta[-j] < 0.5) continue;
    if (j < 64)
      reg.hi |= std::uint64_t{1} << (63 - j);
    else
      reg.lo |= std::uint64_t{1} << (127 - j);
  }
  return spec_.scale * dyadic_map(f.map, reg);
}

double Process::evaluate_mdep(const MDepBlockFamily& f, const double* theta) const {
  // zeta_{mk-o} sits at theta[-o] because the block dimension equals m.
  const int m = f.width;
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  double total = 0.0;
  for (int l = 0; l < m; ++l) {
    double y;
    if (f.map == MDepBlockFamily::Map::sum) {
      y = 0.0;
      for (int s = 0; s < m; ++s) y += theta[-(l + s)];
      y *= inv_sqrt_m;
    } else {
      y = theta[-l] * theta[-(l + m - 1)];
    }
    total += y;
  }
  return spec_.scale * total / m;
}

double Process::evaluate_recursion(const double* theta) const {
  double x = 0.0;
  for (int j = depth_; j >= 0; --j) x = theta[-2 * j] * x + theta[-2 * j + 1];
  return spec_.scale * x;
}

double Process::evaluate_garch(const GarchFamily& f, const double* theta) const {
  const std::size_t p = f.alpha.size(), q = f.beta.size();
  const double m2 = spec_.innovation.second_moment();
  // history[i] holds lag i+1
  std::vector<double> l2(std::max<std::size_t>(p, 1), garch_init_);
  std::vector<double> x2(std::max<std::size_t>(q, 1), garch_init_ * m2);
  double x = 0.0;
  for (int j = depth_; j >= 0; --j) {
    double s = f.mu;
    for (std::size_t i = 0; i < p; ++i) s += f.alpha[i] * l2[i];
    for (std::size_t i = 0; i < q; ++i) s += f.beta[i] * x2[i];
    x = theta[-j] * std::sqrt(s);
    if (p > 0) {
      std::copy_backward(l2.begin(), l2.end() - 1, l2.end());
      l2[0] = s;
    }
    if (q > 0) {
      std::copy_backward(x2.begin(), x2.end() - 1, x2.end());
      x2[0] = x * x;
    }
  }
  return spec_.scale * x;
}

double Process::evaluate_volterra(const VolterraFamily& f, const double* theta) const {
  // Elementary symmetric polynomials of (w_j eps_{k-j}) give the sum over
  // ordered index tuples j_1 < ... < j_i of the product kernel.
  double e[9] = {1.0, 0, 0, 0, 0, 0, 0, 0, 0};
  for (int j = 0; j <= window_; ++j) {
    const double v = weights_[j] * theta[-j];
    for (int i = f.max_order; i >= 1; --i) e[i] += e[i - 1] * v;
  }
  double x = 0.0;
  for (int i = 1; i <= f.max_order; ++i) x += e[i];
  return spec_.scale * x;
}

double Process::evaluate(const double* theta) const {
  return std::visit(
      Overloaded{[&](const LinearFamily& f) { return evaluate_linear(f, theta); },
                 [&](const DyadicFamily& f) { return evaluate_dyadic(f, theta); },
                 [&](const MDepBlockFamily& f) { return evaluate_mdep(f, theta); },
                 [&](const RecursionFamily&) { return evaluate_recursion(theta); },
                 [&](const GarchFamily& f) { return evaluate_garch(f, theta); },
                 [&](const VolterraFamily& f) { return evaluate_volterra(f, theta); }},
      spec_.family);
}

void Process::path(const double* first, std::size_t n, double* out) const {
  const std::size_t dim = dimension();
  if (const auto* rec = std::get_if<RecursionFamily>(&spec_.family)) {
    (void)rec;
    double x = 0.0;
    const std::size_t total = n + static_cast<std::size_t>(depth_);
    for (std::size_t t = 0; t < total; ++t) {
      x = first[2 * t] * x + first[2 * t + 1];
      if (t >= static_cast<std::size_t>(depth_)) out[t - depth_] = spec_.scale * x;
    }
    return;
  }
  if (const auto* g = std::get_if<GarchFamily>(&spec_.family)) {
    const std::size_t p = g->alpha.size(), q = g->beta.size();
    const double m2 = spec_.innovation.second_moment();
    std::vector<double> l2(std::max<std::size_t>(p, 1), garch_init_);
    std::vector<double> x2(std::max<std::size_t>(q, 1), garch_init_ * m2);
    const std::size_t total = n + static_cast<std::size_t>(depth_);
    for (std::size_t t = 0; t < total; ++t) {
      double s = g->mu;
      for (std::size_t i = 0; i < p; ++i) s += g->alpha[i] * l2[i];
      for (std::size_t i = 0; i < q; ++i) s += g->beta[i] * x2[i];
      const double x = first[t] * std::sqrt(s);
      if (p > 0) {
        std::copy_backward(l2.begin(), l2.end() - 1, l2.end());
        l2[0] = s;
      }
      if (q > 0) {
        std::copy_backward(x2.begin(), x2.end() - 1, x2.end());
        x2[0] = x * x;
      }
      if (t >= static_cast<std::size_t>(depth_)) out[t - depth_] = spec_.scale * x;
    }
    return;
  }
  if (const auto* d = std::get_if<DyadicFamily>(&spec_.family)) {
    if (n == 0) return;
    // Build the register for k = 1, then shift one fresh bit in per step.
    const double* at1 = first + depth_;
    DyadicRegister reg;
    for (int j = 0; j < d->bits; ++j) {
      if (at1[-j] < 0.5) continue;
      if (j < 64)
        reg.hi |= std::uint64_t{1} << (63 - j);
      else
        reg.lo |= std::uint64_t{1} << (127 - j);
    }
    const std::uint64_t hm = hi_mask(d->bits), lm = lo_mask(d->bits);
    out[0] = spec_.scale * dyadic_map(d->map, reg);
    for (std::size_t k = 1; k < n; ++k) {
      const std::uint64_t bit = at1[k] >= 0.5 ? 1u : 0u;
      reg.lo = ((reg.lo >> 1) | ((reg.hi & 1u) << 63)) & lm;
      reg.hi = ((reg.hi >> 1) | (bit << 63)) & hm;
      out[k] = spec_.scale * dyadic_map(d->map, reg);
    }
    return;
  }
  const double* at = first + static_cast<std::size_t>(depth_) * dim;
  for (std::size_t k = 0; k < n; ++k) out[k] = evaluate(at + k * dim);
}

std::optional<double> Process::analytic_autocovariance(std::int64_t lag) const {
  const std::int64_t h = lag < 0 ? -lag : lag;
  if (linear_identity()) {
    if (h > window_) return 0.0;
    double s = 0.0;
    for (std::int64_t i = 0; i + h <= window_; ++i)
      s += weights_[static_cast<std::size_t>(i)] * weights_[static_cast<std::size_t>(i + h)];
    return spec_.scale * spec_.scale * spec_.innovation.variance() * s;
  }
  if (const auto* rec = std::get_if<RecursionFamily>(&spec_.family)) {
    if (!rec->independent) return std::nullopt;
    const double ea = rec->a.mean();
    const double gamma0 = rec->b.second_moment() / (1.0 - rec->a.second_moment());
    return spec_.scale * spec_.scale * std::pow(ea, static_cast<double>(h)) * gamma0;
  }
  return std::nullopt;
}

InnovationStream stream_for(const Process& process, Seed64 seed, StreamId id) {
  return InnovationStream{process.innovations(), seed, id};
}

double simulate_sum(const Process& process, std::size_t n, Seed64 seed, PathWorkspace& ws) {
  const std::size_t dim = process.dimension();
  const std::size_t count = n + static_cast<std::size_t>(process.depth());
  ws.innovations.resize(count * dim);
  ws.values.resize(n);
  fill(stream_for(process, seed), 1 - process.depth(), count, ws.innovations);
  process.path(ws.innovations.data(), n, ws.values.data());
  double s = 0.0;
  for (double v : ws.values) s += v;
  return s;
}

PathSample simulate(const Process& process, std::size_t n, Seed64 seed) {
  if (n == 0) throw ConfigError("path-length", "n must be >= 1");
  PathWorkspace ws;
  const std::size_t dim = process.dimension();
  const std::size_t count = n + static_cast<std::size_t>(process.depth());
  ws.innovations.resize(count * dim);
  fill(stream_for(process, seed), 1 - process.depth(), count, ws.innovations);
  PathSample sample;
  sample.values.resize(n);
  process.path(ws.innovations.data(), n, sample.values.data());
  sample.spec = process.spec();
  sample.seed = seed;
  sample.n = n;
  sample.burn_in = process.burn_in();
  return sample;
}

CoupledPathPair simulate_coupled(const Process& process, std::size_t n,
                                 const SwapPlan& plan, Seed64 seed, Seed64 seed_primed) {
  if (n == 0) throw ConfigError("path-length", "n must be >= 1");
  if (plan.mode == SwapPlan::Mode::single && plan.lag > process.window())
    throw ConfigError("swap-depth", "single-swap lag " + std::to_string(plan.lag) +
                                        " exceeds the truncation window " +
                                        std::to_string(process.window()));
  const std::size_t dim = process.dimension();
  const auto depth = static_cast<std::size_t>(process.depth());
  const std::size_t count = n + depth;
  std::vector<double> base(count * dim), primed(count * dim);
  fill(stream_for(process, seed, StreamId::base), 1 - process.depth(), count, base);
  fill(stream_for(process, seed_primed, StreamId::primed), 1 - process.depth(), count,
       primed);

  CoupledPathPair pair;
  pair.plan = plan;
  pair.base.values.resize(n);
  pair.swapped.values.resize(n);
  std::vector<double> window((depth + 1) * dim);
  for (std::size_t k = 0; k < n; ++k) {
    // buffer offset of eps_{k+1-depth}; the window is laid out oldest first
    const double* oldest = base.data() + k * dim;
    std::copy(oldest, oldest + window.size(), window.begin());
    const double* theta = window.data() + depth * dim;
    pair.base.values[k] = process.evaluate(theta);
    for (std::size_t j = 0; j <= depth; ++j) {
      if (!plan.swaps(static_cast<std::int64_t>(j))) continue;
      const std::size_t slot = (depth - j) * dim;
      std::copy_n(primed.data() + k * dim + slot, dim, window.begin() + slot);
    }
    pair.swapped.values[k] = process.evaluate(theta);
  }
  for (PathSample* s : {&pair.base, &pair.swapped}) {
    s->spec = process.spec();
    s->n = n;
    s->burn_in = process.burn_in();
  }
  pair.base.seed = seed;
  pair.swapped.seed = seed_primed;
  return pair;
}

void check_burn_in(const ProcessSpec& spec, std::size_t replications, Seed64 seed) {
  if (!std::holds_alternative<RecursionFamily>(spec.family) &&
      !std::holds_alternative<GarchFamily>(spec.family))
    return;
  const Process process(spec);
  const auto b = static_cast<std::size_t>(process.burn_in());
  // X_1 of a length-(B+1) path has burn-in B; X_{B+1} has burn-in 2B.
  double sum_short = 0, sq_short = 0, sum_long = 0, sq_long = 0;
  PathWorkspace ws;
  const std::size_t dim = process.dimension();
  const std::size_t count = b + 1 + b;
  ws.innovations.resize(count * dim);
  ws.values.resize(b + 1);
  for (std::size_t r = 0; r < replications; ++r) {
    for (int side = 0; side < 2; ++side) {
      fill(stream_for(process, derive_seed(seed, 2 * r + side)), 1 - process.depth(),
           count, ws.innovations);
      process.path(ws.innovations.data(), b + 1, ws.values.data());
      const double v = side == 0 ? ws.values.front() : ws.values.back();
      const double v2 = v * v;
      (side == 0 ? sum_short : sum_long) += v2;
      (side == 0 ? sq_short : sq_long) += v2 * v2;
    }
  }
  const double rn = static_cast<double>(replications);
  const double m_s = sum_short / rn, m_l = sum_long / rn;
  const double var_s = std::max(0.0, sq_short / rn - m_s * m_s);
  const double var_l = std::max(0.0, sq_long / rn - m_l * m_l);
  const double se = std::sqrt((var_s + var_l) / rn);
  if (std::abs(m_s - m_l) > 5.0 * se && std::abs(m_s - m_l) > 1e-12 * std::abs(m_l))
    throw GateError("burn-in", "E[X_1^2] differs between burn-in " + std::to_string(b) +
                                   " and " + std::to_string(2 * b) + " by more than 5 SE");
}

}  // namespace shiftlab
