#include "hulc/quantile.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hulc {
namespace {

constexpr double kBracket = 60.0;
constexpr int kMaxBisections = 2000;

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("probability must lie in (0, 1)");
}

// Lower-tail inverse of a continuous increasing `cdf` for p <= 1/2; the
// root is searched in [-60, 0], widened geometrically for heavy tails.
template <typename Cdf>
double lower_tail_inverse(Cdf cdf, double p) {
  double lo = -kBracket;
  double hi = 0.0;
  while (cdf(lo) > p) {
    hi = lo;
    lo *= 2.0;
    if (!std::isfinite(lo)) return -std::numeric_limits<double>::infinity();
  }
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  check_probability(p);
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -lower_tail_inverse(normal_cdf, 1.0 - p);
  return lower_tail_inverse(normal_cdf, p);
}

double incomplete_beta(double a, double b, double x, double y) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0) throw std::domain_error("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::domain_error("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double t2 = t * t;
  const double denom = df + t2;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / denom, t2 / denom);
  return t < 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(int df, double p) {
  if (df < 1) throw std::domain_error("degrees of freedom must be >= 1");
  check_probability(p);
  if (p == 0.5) return 0.0;
  const double nu = df;
  auto cdf = [nu](double t) { return student_t_cdf(t, nu); };
  if (p > 0.5) return -lower_tail_inverse(cdf, 1.0 - p);
  return lower_tail_inverse(cdf, p);
}

}  // namespace hulc
