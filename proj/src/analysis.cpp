#include "rsub/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace rsub::analysis {

double msd_of_field(const rsub::rdsolver::Grid1D& g,
                    const std::vector<double>& summed, double origin) {
  double m0 = 0.0, m2 = 0.0;
  for (int j = 0; j < g.nx; ++j) {
    m0 += summed[j];
    m2 += (g.x[j] - origin) * (g.x[j] - origin) * summed[j];
  }
  if (m0 <= 0.0) throw std::runtime_error("msd_of_field: vanishing total");
  return m2 / m0;
}

std::vector<std::pair<double, double>> msd_series(
    const std::vector<rsub::rdsolver::Snapshot>& snaps, int species) {
  std::vector<std::pair<double, double>> out;
  out.reserve(snaps.size());
  for (const auto& s : snaps) {
    const auto sums = rsub::rdsolver::observable_sum(s.fields);
    out.emplace_back(s.t, msd_of_field(s.fields.grid, sums[species]));
  }
  return out;
}

namespace {

RegressionResult linear_fit(const std::vector<std::pair<double, double>>& pts,
                            double t_a, double t_b, bool log_t) {
  if (t_a >= t_b) throw std::invalid_argument("regression: t_a < t_b required");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (auto [t, y] : pts) {
    if (t < t_a || t > t_b) continue;
    if (y <= 0.0 || (log_t && t <= 0.0))
      throw std::invalid_argument("regression: nonpositive samples in window");
    const double X = log_t ? std::log(t) : t;
    const double Y = std::log(y);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++n;
  }
  if (n < 3) throw std::invalid_argument("regression: fewer than 3 points");
  const double det = n * sxx - sx * sx;
  RegressionResult r;
  r.t_a = t_a;
  r.t_b = t_b;
  const double slope = (n * sxy - sx * sy) / det;
  r.intercept = (sy - slope * sx) / n;
  r.coefficient = slope;
  double ss = 0.0;
  for (auto [t, y] : pts) {
    if (t < t_a || t > t_b) continue;
    const double X = log_t ? std::log(t) : t;
    const double e = std::log(y) - (slope * X + r.intercept);
    ss += e * e;
  }
  r.residual_norm = std::sqrt(ss);
  return r;
}

}  // namespace

RegressionResult fit_power_law(const std::vector<std::pair<double, double>>& pts,
                               double t_a, double t_b) {
  return linear_fit(pts, t_a, t_b, true);
}

RegressionResult fit_exp_decay(const std::vector<std::pair<double, double>>& pts,
                               double t_a, double t_b) {
  RegressionResult r = linear_fit(pts, t_a, t_b, false);
  r.coefficient = -r.coefficient;  // decay rate
  return r;
}

double l2_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("l2_rel_error: size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) throw std::invalid_argument("l2_rel_error: zero reference");
  return std::sqrt(num / den);
}

}  // namespace rsub::analysis
