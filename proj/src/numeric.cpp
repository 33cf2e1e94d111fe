#include "shiftlab/numeric.hpp"

#include <array>
#include <limits>
#include <stdexcept>
#include <vector>

namespace shiftlab::numeric {

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    if (u == 0.0) return -std::numeric_limits<double>::infinity();
    if (u == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double q = u - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double gaussian_abs_moment(double q) {
  return std::pow(2.0, q / 2.0) * std::tgamma((q + 1.0) / 2.0) / std::sqrt(kPi);
}

namespace {

struct Rule {
  std::array<double, 10> nodes;
  std::array<double, 10> weights;
};

// 10-point Gauss-Legendre on [-1, 1].
constexpr Rule kGL10{
    {-0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
     -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
     0.4333953941292472, 0.6794095682990244, 0.8650633666889845,
     0.9739065285171717},
    {0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
     0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
     0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
     0.0666713443086881}};

constexpr std::array<double, 3> kGL3Nodes{-0.7745966692414834, 0.0,
                                          0.7745966692414834};
constexpr std::array<double, 3> kGL3Weights{0.5555555555555556,
                                            0.8888888888888888,
                                            0.5555555555555556};

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int order) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  if (order == 3) {
    for (std::size_t i = 0; i < 3; ++i)
      sum += kGL3Weights[i] * f(mid + half * kGL3Nodes[i]);
  } else if (order == 10) {
    for (std::size_t i = 0; i < 10; ++i)
      sum += kGL10.weights[i] * f(mid + half * kGL10.nodes[i]);
  } else {
    throw std::invalid_argument("gauss_legendre: supported orders are 3 and 10");
  }
  return half * sum;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int pieces, int order) {
  const double h = (b - a) / pieces;
  double sum = 0.0;
  for (int i = 0; i < pieces; ++i)
    sum += gauss_legendre(f, a + i * h, a + (i + 1) * h, order);
  return sum;
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> weights) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("weighted_line_fit: need >= 2 paired points");
  if (!weights.empty() && weights.size() != x.size())
    throw std::invalid_argument("weighted_line_fit: weight count mismatch");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw std::invalid_argument("weighted_line_fit: x values are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    fit.rss += w * e * e;
  }
  return fit;
}

Estimate mean_estimate(std::span<const double> x) {
  if (x.empty()) return {};
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(x.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(x.size()))};
}

Estimate lp_norm_estimate(std::span<const double> x, double p) {
  std::vector<double> powered(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) powered[i] = std::pow(std::abs(x[i]), p);
  const Estimate moment = mean_estimate(powered);
  if (!(moment.value > 0.0)) return {};
  const double norm = std::pow(moment.value, 1.0 / p);
  return {norm, norm / (p * moment.value) * moment.se};
}

}  // namespace shiftlab::numeric
