#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rsub::wtfit {

struct FitProblem {
  double alpha;       // in (0,1)
  double t_min;       // s
  double t_max;       // s
  int n_states;       // N >= 1
  int multistarts = 16;
  int max_iter = 400;
  double tol = 1e-14;      // step/gradient stopping tolerance
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  int grid_points = 512;   // optimizer grid; model_error always uses 2048
  double eps_ceiling = std::numeric_limits<double>::infinity();
};

struct QuadratureFit {
  std::vector<double> nodes;    // s_i > 0, strictly increasing
  std::vector<double> weights;  // mu~_i > 0, matching order
  double eps_mod = 0.0;
};

// Thrown when the optimizer cannot reach the caller's eps ceiling; carries
// the best fit found.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, QuadratureFit best)
      : std::runtime_error(what), best_fit(std::move(best)) {}
  QuadratureFit best_fit;
};

struct StateParams {
  int n_states = 0;
  std::vector<double> tau_i;        // strictly increasing, s
  std::vector<double> mu_i;         // normalized weights, sum 1
  std::vector<double> raw_weights;  // as-published variant (== mu_i for fits)
  double tau = 0.0;                 // s
  double sigma2 = 0.0;              // m^2, == K_alpha * tau^alpha
  double alpha = 0.0;
  double K_alpha = 0.0;             // m^2 s^-alpha
};

QuadratureFit fit_exponential_sum(const FitProblem& p);

// eps_mod recomputed on a fixed 2048-point log grid (trapezoid in log t).
double model_error(const QuadratureFit& fit, const FitProblem& p);

StateParams to_state_params(const QuadratureFit& fit, double K_alpha,
                            const FitProblem& p);

// Mixture density sum mu_i tau_i^-1 exp(-t/tau_i) with normalized weights.
double approx_waiting_pdf(const StateParams& sp, double t);

// Small-time Poisson-equivalent time scale.
double tau_eq(const StateParams& sp);

// Published parameter tables carry weights that do not sum to one. The
// `printed` scale keeps the published tau (and sigma2 = K tau^alpha) as-is;
// `tail_consistent` rescales tau so that the normalized mixture reproduces
// the same power-law tail, tau^alpha -> tau^alpha / sum(raw weights).
enum class TailScale { printed, tail_consistent };

StateParams state_params_from_table(double alpha, double K_alpha,
                                    std::vector<double> tau_i,
                                    std::vector<double> mu_raw,
                                    double tau_printed,
                                    TailScale scale = TailScale::tail_consistent);

}  // namespace rsub::wtfit
