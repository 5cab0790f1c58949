#pragma once

// Test-only oracles, independent of the library implementation paths.

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_100;

// Mittag-Leffler by direct high-precision series summation with an a
// posteriori tail bound; throws if the bound cannot be certified.
inline double mittag_leffler(double alpha, double beta, double z, int terms = 4000) {
  big sum = 0;
  const big zb = z;
  big zpow = 1;
  big last = 0;
  int small_run = 0;
  int k = 0;
  for (; k < terms; ++k) {
    const big term = zpow / boost::math::tgamma(big(alpha) * k + big(beta));
    sum += term;
    zpow *= zb;
    last = boost::multiprecision::abs(term);
    if (last < big(1e-50) * boost::multiprecision::abs(sum) + big(1e-80)) {
      if (++small_run >= 4 && k > std::fabs(z)) break;
    } else {
      small_run = 0;
    }
  }
  if (k == terms &&
      last > big(1e-40) * boost::multiprecision::abs(sum) + big(1e-60))
    throw std::runtime_error("oracle::mittag_leffler: tail not negligible");
  return sum.convert_to<double>();
}

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h = b - a;
  const double s0 = h / 6.0 * (fa + 4 * fm + fb);
  const double s1 = h / 12.0 * (fa + 4 * flm + 2 * fm + 4 * frm + fb);
  if (depth <= 0 || std::fabs(s1 - s0) < 15.0 * tol) return s1 + (s1 - s0) / 15.0;
  return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 20) {
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(m), f(b), tol, depth);
}

}  // namespace oracle
