#pragma once

#include <utility>
#include <vector>

#include "rsub/rdsolver.hpp"

namespace rsub::analysis {

struct RegressionResult {
  double coefficient = 0.0;  // exponent (power law) or rate (exp decay)
  double intercept = 0.0;
  double residual_norm = 0.0;
  double t_a = 0.0, t_b = 0.0;
};

// Second moment about the origin of the summed field:
// msd(t) = h sum x^2 U / (h sum U).
double msd_of_field(const rsub::rdsolver::Grid1D& g,
                    const std::vector<double>& summed, double origin = 0.0);

std::vector<std::pair<double, double>> msd_series(
    const std::vector<rsub::rdsolver::Snapshot>& snaps, int species = 0);

// Least-squares slope of log y vs log t over [t_a, t_b].
RegressionResult fit_power_law(const std::vector<std::pair<double, double>>& pts,
                               double t_a, double t_b);

// Slope of log y vs t; coefficient is the decay rate (-slope).
RegressionResult fit_exp_decay(const std::vector<std::pair<double, double>>& pts,
                               double t_a, double t_b);

// ||a - b||_2 / ||b||_2 over grid nodes (b is the reference).
double l2_rel_error(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace rsub::analysis
