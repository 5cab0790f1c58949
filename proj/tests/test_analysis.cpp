#include "doctest.h"
#include "rsub/analysis.hpp"

#include <cmath>

using namespace rsub::analysis;
using rsub::rdsolver::Grid1D;

TEST_CASE("msd_of_field point mass and translation consistency") {
  const auto g = Grid1D::make(-1.0, 1.0, 5);  // centers at -0.8 .. 0.8
  std::vector<double> u(5, 0.0);
  u[2] = 3.0;  // all mass at x = 0
  CHECK(msd_of_field(g, u) == doctest::Approx(0.0));
  u[1] = 1.0;
  const double m = msd_of_field(g, u);

  const double c = 0.37;
  const auto gs = Grid1D::make(-1.0 + c, 1.0 + c, 5);
  CHECK(msd_of_field(gs, u, c) == doctest::Approx(m).epsilon(1e-12));

  std::vector<double> zero(5, 0.0);
  CHECK_THROWS(msd_of_field(g, zero));
}

TEST_CASE("fit_power_law exact recovery") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 1; i <= 30; ++i) {
    const double t = 1e-3 * std::pow(10.0, i / 10.0);
    pts.emplace_back(t, 3.0 * std::pow(t, 0.7));
  }
  const auto r = fit_power_law(pts, 1e-3, 10.0);
  CHECK(r.coefficient == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::exp(r.intercept) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.residual_norm < 1e-10);
  CHECK_THROWS(fit_power_law(pts, 1e-3, 1.2e-3));  // fewer than 3 points
}

TEST_CASE("fit_exp_decay exact recovery") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.05 * i;
    pts.emplace_back(t, 5.0 * std::exp(-2.0 * t));
  }
  const auto r = fit_exp_decay(pts, 0.0, 1.0);
  CHECK(r.coefficient == doctest::Approx(2.0).epsilon(1e-12));
  // window placement does not matter for a pure exponential
  const auto r2 = fit_exp_decay(pts, 0.5, 1.0);
  CHECK(r2.coefficient == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("l2_rel_error") {
  std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(l2_rel_error(a, a) == doctest::Approx(0.0));
  std::vector<double> b{1.0, 2.0, 4.0};
  CHECK(l2_rel_error(a, b) ==
        doctest::Approx(1.0 / std::sqrt(21.0)).epsilon(1e-12));
  // asymmetric by construction (relative to the reference)
  CHECK(l2_rel_error(a, b) != l2_rel_error(b, a));
  std::vector<double> z{0.0, 0.0, 0.0};
  CHECK_THROWS(l2_rel_error(a, z));
  std::vector<double> c{1.0};
  CHECK_THROWS(l2_rel_error(a, c));
}
