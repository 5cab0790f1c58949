#include "rsub/specfun.hpp"

#include <cmath>
#include <limits>

namespace rsub::specfun {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrtPi = 1.772453850905516027298167483341145183;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// 1/Gamma(y) as (sign, log magnitude); exact zero at the poles.
struct LogVal {
  double logmag;
  int sign;  // 0 means the value is exactly zero
};

LogVal log_rgamma(double y) {
  if (y > 0.5) {
    return {-std::lgamma(y), 1};
  }
  // reflection: 1/Gamma(y) = sin(pi y) Gamma(1-y) / pi
  const double s = std::sin(kPi * y);
  if (s == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
  return {std::log(std::fabs(s) / kPi) + std::lgamma(1.0 - y), s > 0 ? 1 : -1};
}

double rgamma(double y) {
  const LogVal v = log_rgamma(y);
  if (v.sign == 0) return 0.0;
  return v.sign * std::exp(v.logmag);
}

// Taylor series sum_k z^k / Gamma(alpha k + beta), long double accumulation.
double ml_taylor(double alpha, double beta, double z) {
  const int cap = 10000;
  long double sum = 0.0L;
  long double comp = 0.0L;  // Kahan compensation
  int small_run = 0;
  for (int k = 0; k < cap; ++k) {
    const LogVal g = log_rgamma(alpha * k + beta);
    long double term = 0.0L;
    if (g.sign != 0) {
      const double lt = (k == 0 ? 0.0 : k * std::log(std::fabs(z))) + g.logmag;
      term = g.sign * std::exp((long double)lt);
      if (z < 0 && (k & 1)) term = -term;
    }
    const long double y = term - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    const double ref = std::max(std::fabs((double)sum), 1e-300);
    if (std::fabs((double)term) < 1e-18 * ref && k > std::fabs(z)) {
      if (++small_run >= 4) return (double)sum;
    } else {
      small_run = 0;
    }
  }
  throw EvaluationError("Mittag-Leffler Taylor series did not converge",
                        (double)sum, std::numeric_limits<double>::infinity());
}

// Algebraic expansion E ~ -sum_{k>=1} z^-k / Gamma(beta - alpha k) for
// large negative z, truncated at the smallest term.
double ml_asymptotic(double alpha, double beta, double z) {
  const double lz = std::log(std::fabs(z));
  long double sum = 0.0L;
  double prev = std::numeric_limits<double>::infinity();
  double bound = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 300; ++k) {
    const LogVal g = log_rgamma(beta - alpha * k);
    double term = 0.0;
    if (g.sign != 0) {
      term = -g.sign * std::exp(-k * lz + g.logmag);
      if (z < 0 && (k & 1)) term = -term;
    }
    const double mag = std::fabs(term);
    if (mag > prev && prev < std::fabs((double)sum)) {
      bound = prev;  // divergence onset; previous term bounds the error
      break;
    }
    sum += (long double)term;
    if (mag > 0) prev = mag;
    bound = mag;
    if (mag < 1e-16 * std::fabs((double)sum)) break;
  }
  const double s = (double)sum;
  if (!(bound <= 1e-10 * std::max(std::fabs(s), 1e-300))) {
    throw EvaluationError("Mittag-Leffler asymptotic series stalled", s, bound);
  }
  return s;
}

double ml_half_one(double z) {
  // E_{1/2,1}(z) = exp(z^2) erfc(-z)
  if (z <= 0) return erfcx(-z);
  if (z > 26.0) return std::numeric_limits<double>::infinity();
  return std::exp(z * z) * std::erfc(-z);
}

double ml_half_half(double z) {
  // E_{1/2,1/2}(z) = 1/sqrt(pi) + z E_{1/2,1}(z)
  if (z == 0.0) return 1.0 / kSqrtPi;
  if (z > 26.0) return std::numeric_limits<double>::infinity();
  return 1.0 / kSqrtPi + z * ml_half_one(z);
}

}  // namespace

double erfcx(double x) {
  if (x < 0) {
    const double x2 = x * x;
    if (x2 > 700.0) return std::numeric_limits<double>::infinity();
    return 2.0 * std::exp(x2) - erfcx(-x);
  }
  if (x < 6.0) return std::exp(x * x) * std::erfc(x);
  // asymptotic: 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4) - ...)
  const double inv2x2 = 1.0 / (2.0 * x * x);
  long double sum = 1.0L, term = 1.0L;
  for (int k = 1; k <= 40; ++k) {
    term *= -(2 * k - 1) * inv2x2;
    const long double next = sum + term;
    if (std::fabs((double)term) < 1e-17) {
      sum = next;
      break;
    }
    sum = next;
  }
  return (double)sum / (x * kSqrtPi);
}

double mittag_leffler(const MLParams& p, double z) {
  require(p.alpha > 0.0 && p.alpha <= 1.0, "mittag_leffler: alpha in (0,1]");
  require(p.beta > 0.0, "mittag_leffler: beta > 0");
  if (p.alpha == 1.0 && p.beta == 1.0) return std::exp(z);
  if (p.alpha == 0.5) {
    if (p.beta == 0.5) return ml_half_half(z);
    if (p.beta == 1.0) return ml_half_one(z);
  }
  if (z >= -5.0) return ml_taylor(p.alpha, p.beta, z);
  return ml_asymptotic(p.alpha, p.beta, z);
}

double tail_amplitude(double alpha) {
  return std::sin(kPi * alpha) * std::tgamma(1.0 + alpha) / kPi;
}

double waiting_time_pdf(double alpha, double tau, double t) {
  require(alpha > 0.0 && alpha <= 1.0, "waiting_time_pdf: alpha in (0,1]");
  require(tau > 0.0 && t > 0.0, "waiting_time_pdf: tau, t > 0");
  if (alpha == 1.0) return std::exp(-t / tau) / tau;
  const double r = std::pow(t / tau, alpha);
  const double e = mittag_leffler({alpha, alpha}, -r);
  return std::pow(t, alpha - 1.0) / std::pow(tau, alpha) * e;
}

double waiting_time_tail(double alpha, double tau, double t) {
  require(tau > 0.0 && t > 0.0, "waiting_time_tail: tau, t > 0");
  return tail_amplitude(alpha) * std::pow(tau, alpha) / std::pow(t, 1.0 + alpha);
}

namespace {

// Residue series: G = sum_j Gamma(a1) Gamma(a2) z^{b_j} 0F2(; 1-a1, 1-a2; -z)
// with a1 = b_j' - b_j, a2 = b_j'' - b_j.
double meijer_series(double z, const std::array<double, 3>& b,
                     const MeijerGOptions& opt, double* cancellation) {
  long double sum = 0.0L, abs_sum = 0.0L;
  for (int j = 0; j < 3; ++j) {
    const double bj = b[j];
    const double a1 = b[(j + 1) % 3] - bj;
    const double a2 = b[(j + 2) % 3] - bj;
    // term_0 = Gamma(a1) Gamma(a2) z^{b_j}; recurrence over m:
    // term_{m+1} = term_m * (-z) / ((m+1)(1-a1+m)(1-a2+m))
    if (z == 0.0) {
      if (bj == 0.0) sum += (long double)(std::tgamma(a1) * std::tgamma(a2));
      continue;
    }
    long double term =
        (long double)std::tgamma(a1) * std::tgamma(a2) *
        std::exp((long double)(bj * std::log(z)));
    for (int m = 0; m < opt.term_cap; ++m) {
      sum += term;
      abs_sum += std::fabs((double)term);
      if (std::fabs((double)term) < 1e-18 * std::max(std::fabs((double)sum), 1e-300) &&
          m > 2)
        break;
      term *= -(long double)z /
              ((m + 1.0L) * (1.0L - a1 + m) * (1.0L - a2 + m));
    }
  }
  if (cancellation)
    *cancellation = (double)(abs_sum / std::max(std::fabs(sum), (long double)1e-300));
  return (double)sum;
}

double meijer_asym_leading(double z, const std::array<double, 3>& b) {
  const double theta = (b[0] + b[1] + b[2] - 1.0) / 3.0;
  return 2.0 * kPi / std::sqrt(3.0) * std::pow(z, theta) *
         std::exp(-3.0 * std::cbrt(z));
}

}  // namespace

double meijer_g_303(double z, const std::array<double, 3>& b,
                    const MeijerGOptions& opt) {
  require(z >= 0.0, "meijer_g_303: z >= 0");
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double d = b[i] - b[j];
      require(std::fabs(d - std::round(d)) > 1e-9,
              "meijer_g_303: b indices congruent mod 1 (non-simple poles)");
    }
  // The residue series is accurate wherever its cancellation stays below
  // tolerance; that covers small z always, and extends far out for shifted
  // indices. The exponential asymptotic form only becomes valid around
  // z ~ 8 max(b)^3.
  double cancel = 0.0;
  const double v = meijer_series(z, b, opt, &cancel);
  const double lost = cancel * 5.5e-20;  // long double ulp
  if (lost <= opt.rel_tol) return v;
  const double bmax = std::max({std::fabs(b[0]), std::fabs(b[1]), std::fabs(b[2])});
  const double zc = std::max(opt.crossover, 8.0 * bmax * bmax * bmax);
  if (z < zc) {
    throw EvaluationError(
        "meijer_g_303: series cancellation exceeds tolerance below the "
        "asymptotic validity threshold",
        v, lost);
  }
  // matched exponential tail: scale the leading form for continuity at the
  // seam, where the series is still usable
  const double series_c = meijer_series(zc, b, opt, &cancel);
  const double scale = series_c / meijer_asym_leading(zc, b);
  return scale * meijer_asym_leading(z, b);
}

double green_pure_half(double x, double t, const GreenCoeffs& c) {
  require(t > 0.0, "green_pure_half: t > 0");
  require(c.K_alpha > 0.0, "green_pure_half: K_alpha > 0");
  require(c.k_star == 0.0, "green_pure_half: k_star must be 0");
  const double ks = c.K_alpha * std::sqrt(t);
  const double arg = x * x / (16.0 * ks);
  const double g = meijer_g_303(arg * arg, {0.0, 0.25, 0.5});
  return c.mass / std::sqrt(8.0 * kPi * kPi * kPi * ks) * g;
}

AnnihilationInfo green_annihilation_half_info(ReactionModel m, double x,
                                              double t, const GreenCoeffs& c) {
  require(t > 0.0, "green_annihilation_half: t > 0");
  require(c.K_alpha > 0.0, "green_annihilation_half: K_alpha > 0");
  require(c.k_star >= 0.0, "green_annihilation_half: k_star >= 0");
  AnnihilationInfo info;
  if (m == ReactionModel::II) {
    GreenCoeffs pure = c;
    pure.k_star = 0.0;
    info.value = std::exp(-c.k_star * t) * green_pure_half(x, t, pure);
    info.terms = 1;
    return info;
  }
  const double ks = c.K_alpha * std::sqrt(t);
  const double arg = x * x / (16.0 * ks);
  const double z = arg * arg;
  // annihilation only removes mass, so the pure kernel bounds this one;
  // below ~3e-6 of the peak the alternating j-series cannot be resolved
  // and the value is reported as zero.
  {
    GreenCoeffs pure = c;
    pure.k_star = 0.0;
    pure.mass = 1.0;
    if (green_pure_half(x, t, pure) <
        3e-6 * green_pure_half(0.0, t, pure)) {
      info.value = 0.0;
      return info;
    }
  }
  MeijerGOptions inner;
  inner.rel_tol = 1e-5;  // absolute error stays ~1e-11 of the kernel peak
  const double cj = 2.0 * c.k_star * std::sqrt(t);  // |series ratio base|
  const int j_cap = 200;
  long double sum = 0.0L;
  double max_term = 0.0;
  int j = 0;
  for (; j < j_cap; ++j) {
    const double g = meijer_g_303(z, {0.0, 0.25 + 0.5 * j, 0.5}, inner);
    double mag = (j == 0) ? 1.0
                          : std::exp(j * std::log(cj) - std::lgamma(j + 1.0));
    long double term = (long double)mag * g;
    if (j & 1) term = -term;
    sum += term;
    max_term = std::max(max_term, std::fabs((double)term));
    const double t_abs = std::fabs((double)term);
    if (j > 3 && (t_abs < 1e-12 * std::max(std::fabs((double)sum), 1e-300) ||
                  t_abs <= 1e-16 * max_term)) {
      ++j;
      break;
    }
    if (cj == 0.0) {
      ++j;
      break;
    }
  }
  info.terms = j;
  info.truncated = (j >= j_cap);
  // summation error scales with the largest alternating term; compare
  // against the x = 0 kernel scale Gamma(1/4) Gamma(1/2)
  const double abs_err = 5.5e-20 * max_term;
  if (info.truncated || abs_err > 1e-5 * 6.426189772481537) {
    throw EvaluationError(
        "green_annihilation_half: j-series exceeded the truncation budget "
        "(k_star * t^alpha too large)",
        (double)sum, std::max(abs_err, std::fabs((double)sum)));
  }
  // far tail below the summation noise floor: report zero instead of noise
  double s = (double)sum;
  if (std::fabs(s) < 10.0 * abs_err) s = 0.0;
  info.value = c.mass / std::sqrt(8.0 * kPi * kPi * kPi * ks) * s;
  return info;
}

double green_annihilation_half(ReactionModel m, double x, double t,
                               const GreenCoeffs& c) {
  return green_annihilation_half_info(m, x, t, c).value;
}

std::pair<double, double> green_mono_half(ReactionModel m, double x, double t,
                                          const GreenCoeffs& c, double u0,
                                          double v0) {
  require(c.k_star >= 0.0 && c.ell_star >= 0.0,
          "green_mono_half: rates >= 0");
  GreenCoeffs pure = c;
  pure.k_star = 0.0;
  pure.ell_star = 0.0;
  pure.mass = 1.0;
  const double rate = c.k_star + c.ell_star;
  if (rate == 0.0) {
    const double g = green_pure_half(x, t, pure);
    return {u0 * g, v0 * g};
  }
  // P = [[1, l],[-1, k]]: reactive component evolves with rate k+l,
  // conserved component with the pure kernel.
  const double w1 = (c.k_star * u0 - c.ell_star * v0) / rate;
  const double w2 = (u0 + v0) / rate;
  GreenCoeffs ann = pure;
  ann.k_star = rate;
  const double g_r = green_annihilation_half(m, x, t, ann);
  const double g_p = green_pure_half(x, t, pure);
  return {w1 * g_r + c.ell_star * w2 * g_p,
          -w1 * g_r + c.k_star * w2 * g_p};
}

}  // namespace rsub::specfun
