#pragma once

// Reference computations used only by tests. They share no code with the
// library paths they check.

#include <cmath>
#include <functional>

namespace hulc::oracle {

// Composite Simpson rule in long double.
inline long double simpson(const std::function<long double(long double)>& f, long double a, long double b,
                           int panels) {
  if (panels % 2) ++panels;
  const long double h = (b - a) / panels;
  long double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0L : 2.0L);
  return s * h / 3.0L;
}

inline long double normal_cdf(long double z) {
  const auto phi = [](long double t) { return std::exp(-0.5L * t * t) / std::sqrt(2.0L * 3.14159265358979323846L); };
  return 0.5L + simpson(phi, 0.0L, z, 20000);
}

inline long double t_cdf(long double q, int df) {
  const long double nu = df;
  const long double norm =
      std::exp(std::lgamma((nu + 1.0L) / 2.0L) - std::lgamma(nu / 2.0L)) / std::sqrt(nu * 3.14159265358979323846L);
  const auto dens = [&](long double t) { return norm * std::pow(1.0L + t * t / nu, -(nu + 1.0L) / 2.0L); };
  return 0.5L + simpson(dens, 0.0L, q, 20000);
}

// Upper-half inverse by bisection of an increasing cdf on [0, hi].
inline double invert_upper(const std::function<long double(long double)>& cdf, double p, double hi = 20.0) {
  long double lo = 0.0L, up = hi;
  for (int i = 0; i < 80; ++i) {
    const long double mid = 0.5L * (lo + up);
    if (cdf(mid) < p)
      lo = mid;
    else
      up = mid;
  }
  return static_cast<double>(0.5L * (lo + up));
}

}  // namespace hulc::oracle
