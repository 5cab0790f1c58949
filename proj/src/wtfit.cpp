#include "rsub/wtfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rsub/specfun.hpp"

namespace rsub::wtfit {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

struct LogGrid {
  std::vector<double> t;
  std::vector<double> w;  // quadrature weights for (1/(tmax-tmin)) int . dt
};

LogGrid make_grid(double t_min, double t_max, int n) {
  LogGrid g;
  g.t.resize(n);
  g.w.resize(n);
  const double lu = std::log(t_min), hu = std::log(t_max);
  const double du = (hu - lu) / (n - 1);
  for (int q = 0; q < n; ++q) g.t[q] = std::exp(lu + q * du);
  // trapezoid in log t with dt = t du
  for (int q = 0; q < n; ++q) {
    const double c = (q == 0 || q == n - 1) ? 0.5 : 1.0;
    g.w[q] = c * du * g.t[q] / (t_max - t_min);
  }
  return g;
}

// residual r_q = (F_approx(t_q) t_q^{1+alpha} - 1) sqrt(w_q)
Eigen::VectorXd residuals(const Eigen::VectorXd& p, const LogGrid& g,
                          double alpha, int N) {
  const int m = (int)g.t.size();
  Eigen::VectorXd r(m);
  for (int q = 0; q < m; ++q) {
    double F = 0.0;
    for (int i = 0; i < N; ++i)
      F += std::exp(p[N + i] - std::exp(p[i]) * g.t[q]);
    r[q] = (F * std::pow(g.t[q], 1.0 + alpha) - 1.0) * std::sqrt(g.w[q]);
  }
  return r;
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& p, const LogGrid& g,
                         double alpha, int N) {
  const int m = (int)g.t.size();
  Eigen::MatrixXd J(m, 2 * N);
  for (int q = 0; q < m; ++q) {
    const double tq = g.t[q];
    const double scale = std::pow(tq, 1.0 + alpha) * std::sqrt(g.w[q]);
    for (int i = 0; i < N; ++i) {
      const double s = std::exp(p[i]);
      const double term = std::exp(p[N + i] - s * tq);
      J(q, i) = -term * s * tq * scale;  // d/d log s_i
      J(q, N + i) = term * scale;        // d/d log mu_i
    }
  }
  return J;
}

// Damped Gauss-Newton (Levenberg) local search in log parameters.
double levenberg(Eigen::VectorXd& p, const LogGrid& g, double alpha, int N,
                 int max_iter, double tol) {
  double lambda = 1e-3;
  Eigen::VectorXd r = residuals(p, g, alpha, N);
  double cost = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd J = jacobian(p, g, alpha, N);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd grad = J.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < tol) break;
    bool stepped = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd M = JtJ;
      M.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd step = M.ldlt().solve(-grad);
      const Eigen::VectorXd pn = p + step;
      const Eigen::VectorXd rn = residuals(pn, g, alpha, N);
      const double cn = rn.squaredNorm();
      if (cn < cost) {
        p = pn;
        r = rn;
        const bool small_step = step.lpNorm<Eigen::Infinity>() < tol;
        cost = cn;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (small_step) return cost;
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) break;
  }
  return cost;
}

double uniform01(std::mt19937_64& rng) {
  return ((rng() >> 11) + 0.5) * 0x1.0p-53;
}

double normal01(std::mt19937_64& rng) {
  const double u1 = uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double eps_on_grid(const QuadratureFit& fit, const FitProblem& p, int n) {
  const LogGrid g = make_grid(p.t_min, p.t_max, n);
  double acc = 0.0;
  for (size_t q = 0; q < g.t.size(); ++q) {
    double F = 0.0;
    for (size_t i = 0; i < fit.nodes.size(); ++i)
      F += fit.weights[i] * std::exp(-fit.nodes[i] * g.t[q]);
    const double r = F * std::pow(g.t[q], 1.0 + p.alpha) - 1.0;
    acc += r * r * g.w[q];
  }
  return std::sqrt(acc);
}

}  // namespace

QuadratureFit fit_exponential_sum(const FitProblem& p) {
  require(p.alpha > 0.0 && p.alpha < 1.0, "fit: alpha in (0,1)");
  require(p.t_min > 0.0 && p.t_max > p.t_min, "fit: 0 < t_min < t_max");
  require(p.n_states >= 1, "fit: n_states >= 1");
  const int N = p.n_states;
  const LogGrid g = make_grid(p.t_min, p.t_max, p.grid_points);

  std::mt19937_64 rng(p.seed);
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p;
  for (int start = 0; start < p.multistarts; ++start) {
    Eigen::VectorXd pv(2 * N);
    for (int i = 0; i < N; ++i) {
      double ls = (N == 1) ? 0.5 * (std::log(1.0 / p.t_max) + std::log(1.0 / p.t_min))
                           : std::log(1.0 / p.t_max) +
                                 i * (std::log(1.0 / p.t_min) - std::log(1.0 / p.t_max)) /
                                     (N - 1);
      if (start > 0) ls += 0.4 * normal01(rng);
      pv[i] = ls;
    }
    // linear least squares for the weights with nodes frozen
    {
      const int m = (int)g.t.size();
      Eigen::MatrixXd E(m, N);
      Eigen::VectorXd ones(m);
      for (int q = 0; q < m; ++q) {
        const double sc = std::pow(g.t[q], 1.0 + p.alpha) * std::sqrt(g.w[q]);
        for (int i = 0; i < N; ++i)
          E(q, i) = std::exp(-std::exp(pv[i]) * g.t[q]) * sc;
        ones[q] = std::sqrt(g.w[q]);
      }
      const Eigen::VectorXd mu =
          E.colPivHouseholderQr().solve(ones).cwiseMax(1e-12);
      for (int i = 0; i < N; ++i) pv[N + i] = std::log(mu[i]);
    }
    const double cost = levenberg(pv, g, p.alpha, N, p.max_iter, p.tol);
    if (cost < best_cost) {
      best_cost = cost;
      best_p = pv;
    }
  }

  QuadratureFit fit;
  std::vector<int> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return best_p[a] < best_p[b];
  });
  for (int i : idx) {
    fit.nodes.push_back(std::exp(best_p[i]));
    fit.weights.push_back(std::exp(best_p[N + i]));
  }
  fit.eps_mod = eps_on_grid(fit, p, 2048);
  if (fit.eps_mod > p.eps_ceiling) {
    throw FitError("fit_exponential_sum: eps_mod above the requested ceiling",
                   fit);
  }
  return fit;
}

double model_error(const QuadratureFit& fit, const FitProblem& p) {
  return eps_on_grid(fit, p, 2048);
}

StateParams to_state_params(const QuadratureFit& fit, double K_alpha,
                            const FitProblem& p) {
  require(!fit.nodes.empty() && fit.nodes.size() == fit.weights.size(),
          "to_state_params: invalid fit");
  StateParams sp;
  sp.n_states = (int)fit.nodes.size();
  sp.alpha = p.alpha;
  sp.K_alpha = K_alpha;
  double S = 0.0;
  for (size_t i = 0; i < fit.nodes.size(); ++i)
    S += fit.weights[i] / fit.nodes[i];
  // tau_i ascending corresponds to nodes descending
  for (size_t i = fit.nodes.size(); i-- > 0;) {
    sp.tau_i.push_back(1.0 / fit.nodes[i]);
    sp.mu_i.push_back(fit.weights[i] / fit.nodes[i] / S);
  }
  sp.raw_weights = sp.mu_i;  // published tables deviate; own fits do not
  sp.tau = std::pow(specfun::tail_amplitude(p.alpha) * S, -1.0 / p.alpha);
  sp.sigma2 = K_alpha * std::pow(sp.tau, p.alpha);
  return sp;
}

double approx_waiting_pdf(const StateParams& sp, double t) {
  require(t >= 0.0, "approx_waiting_pdf: t >= 0");
  double v = 0.0;
  for (int i = 0; i < sp.n_states; ++i)
    v += sp.mu_i[i] / sp.tau_i[i] * std::exp(-t / sp.tau_i[i]);
  return v;
}

double tau_eq(const StateParams& sp) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < sp.n_states; ++i) {
    num += sp.mu_i[i] / sp.tau_i[i];
    den += sp.mu_i[i] / (sp.tau_i[i] * sp.tau_i[i]);
  }
  return num / den;
}

StateParams state_params_from_table(double alpha, double K_alpha,
                                    std::vector<double> tau_i,
                                    std::vector<double> mu_raw,
                                    double tau_printed, TailScale scale) {
  require(tau_i.size() == mu_raw.size() && !tau_i.empty(),
          "state_params_from_table: mismatched arrays");
  for (size_t i = 1; i < tau_i.size(); ++i)
    require(tau_i[i] > tau_i[i - 1], "state_params_from_table: tau not sorted");
  StateParams sp;
  sp.n_states = (int)tau_i.size();
  sp.alpha = alpha;
  sp.K_alpha = K_alpha;
  sp.tau_i = std::move(tau_i);
  sp.raw_weights = mu_raw;
  const double sum = std::accumulate(mu_raw.begin(), mu_raw.end(), 0.0);
  sp.mu_i.resize(sp.n_states);
  for (int i = 0; i < sp.n_states; ++i) sp.mu_i[i] = mu_raw[i] / sum;
  if (scale == TailScale::printed) {
    sp.tau = tau_printed;
  } else {
    sp.tau = std::pow(std::pow(tau_printed, alpha) / sum, 1.0 / alpha);
  }
  sp.sigma2 = K_alpha * std::pow(sp.tau, alpha);
  return sp;
}

}  // namespace rsub::wtfit
