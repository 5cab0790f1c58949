#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

namespace rsub::specfun {

// Thrown when a series representation cannot reach the requested accuracy.
// Carries the partial sum and an estimate of the remaining error.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double partial, double bound)
      : std::runtime_error(what), partial_sum(partial), error_bound(bound) {}
  double partial_sum;
  double error_bound;
};

struct MLParams {
  double alpha;  // order in (0,1]
  double beta;   // second parameter > 0
};

// Scaled complementary error function exp(x^2) erfc(x), valid for all x
// where the result is representable.
double erfcx(double x);

// Generalized Mittag-Leffler function E_{alpha,beta}(z) for real z.
// alpha = 1 and alpha = 1/2 use closed forms; other orders use the Taylor
// series for z >= -5 and the algebraic asymptotic expansion for z < -5.
// Accuracy: ~1e-13 relative on the closed-form orders; for generic alpha
// the documented target is 1e-10 except in a band around the series
// switch point where the asymptotic truncation bound applies (an
// EvaluationError reports the achievable bound when it exceeds 1e-10).
double mittag_leffler(const MLParams& p, double z);

// Mittag-Leffler waiting time density psi(t) = t^(a-1)/tau^a E_{a,a}(-(t/tau)^a).
double waiting_time_pdf(double alpha, double tau, double t);

// Power-law tail A_a tau^a / t^(1+a) with A_a = sin(pi a) Gamma(1+a) / pi.
double waiting_time_tail(double alpha, double tau, double t);
double tail_amplitude(double alpha);

struct MeijerGOptions {
  int term_cap = 500;
  double rel_tol = 1e-10;
  double crossover = 40.0;  // switch to the matched exponential tail
};

// G^{3,0}_{0,3}(z | b1,b2,b3) for z >= 0 via the residue series (three
// 0F2-type series); beyond `crossover` the leading large-z form
// ~ z^((b1+b2+b3-1)/3) exp(-3 z^(1/3)) is used, scaled for continuity
// at the seam.
double meijer_g_303(double z, const std::array<double, 3>& b,
                    const MeijerGOptions& opt = {});

struct GreenCoeffs {
  double K_alpha = 0.0;   // m^2 s^-alpha
  double k_star = 0.0;    // s^-alpha (model I) / s^-1 (model II)
  double ell_star = 0.0;  // reverse rate, same convention
  double mass = 1.0;      // mol
};

enum class ReactionModel { I, II };

// Free-space Green's function of the alpha = 1/2 fractional diffusion
// equation, scaled by c.mass. Requires c.k_star == 0.
double green_pure_half(double x, double t, const GreenCoeffs& c);

struct AnnihilationInfo {
  double value = 0.0;
  int terms = 0;
  bool truncated = false;  // j-series hit the cap before converging
};

double green_annihilation_half(ReactionModel m, double x, double t,
                               const GreenCoeffs& c);
AnnihilationInfo green_annihilation_half_info(ReactionModel m, double x,
                                              double t, const GreenCoeffs& c);

// Reversible isomerization A <-> B at alpha = 1/2: diagonalizes the
// reaction matrix and propagates the two eigencomponents with the pure
// and annihilation kernels. u0, v0 are the initial masses.
std::pair<double, double> green_mono_half(ReactionModel m, double x, double t,
                                          const GreenCoeffs& c, double u0,
                                          double v0);

}  // namespace rsub::specfun
