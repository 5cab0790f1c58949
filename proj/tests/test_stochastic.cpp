#include "doctest.h"
#include "rsub/stochastic.hpp"

#include <Eigen/Dense>
#include <cmath>

using namespace rsub::stochastic;
using rsub::states::RateScaling;
using rsub::states::ReactionKind;
using rsub::states::ReactionSpec;
using rsub::wtfit::StateParams;

namespace {

StateParams single_state(double tau, double sigma2) {
  StateParams sp;
  sp.n_states = 1;
  sp.tau_i = {tau};
  sp.mu_i = {1.0};
  sp.raw_weights = sp.mu_i;
  sp.sigma2 = sigma2;
  sp.alpha = 1.0;
  sp.K_alpha = sigma2 / tau;
  sp.tau = tau;
  return sp;
}

StateParams set1() {
  return rsub::wtfit::state_params_from_table(
      0.5, 0.04, {9.51e-5, 5.40e-4, 3.09e-3, 2.13e-2},
      {4.96e-1, 2.07e-1, 8.80e-2, 4.42e-2}, 7.62e-5);
}

}  // namespace

TEST_CASE("ssa linear death process matches the exponential mean") {
  EventTable tab;
  tab.params = single_state(1.0, 0.0);
  tab.diffusion = false;
  tab.state_changes = false;
  ReactionSpec rs;
  rs.kind = ReactionKind::annihilation;
  rs.scaling = RateScaling::model_II;
  rs.k = 3.0;
  tab.reaction = rs;
  auto init = LatticeState::zeros(1, 1, 1, 1.0);
  init.at(0, 0, 0) = 1000;
  SsaOptions opt;
  opt.t_end = 0.3;
  opt.seed = 2024;
  opt.sample_times = {0.1, 0.3};
  const auto ens = ssa_ensemble(init, tab, opt, 3000);
  for (size_t s = 0; s < ens.times.size(); ++s) {
    const double expect = 1000.0 * std::exp(-3.0 * ens.times[s]);
    CHECK(std::fabs(ens.mean[s][0] - expect) < 3.0 * ens.stderr_[s][0]);
  }
}

TEST_CASE("ssa two-voxel diffusion equilibrates") {
  EventTable tab;
  tab.params = single_state(1e-2, 0.5);
  auto init = LatticeState::zeros(1, 1, 2, 1.0);
  init.at(0, 0, 0) = 400;
  SsaOptions opt;
  opt.t_end = 0.5;
  opt.seed = 7;
  opt.sample_times = {0.5};
  const auto ens = ssa_ensemble(init, tab, opt, 400);
  CHECK(std::fabs(ens.mean[0][0] - 200.0) < 3.0 * ens.stderr_[0][0]);
  CHECK(std::fabs(ens.mean[0][1] - 200.0) < 3.0 * ens.stderr_[0][1]);
}

TEST_CASE("ssa state-change stationary occupancy follows mu tau") {
  const auto sp = set1();
  EventTable tab;
  tab.params = sp;
  tab.diffusion = false;
  auto init = LatticeState::zeros(1, 4, 1, 1.0);
  init.at(0, 0, 0) = 2000;
  SsaOptions opt;
  opt.t_end = 0.4;  // >> tau_N
  opt.seed = 99;
  opt.sample_times = {0.4};
  const auto ens = ssa_ensemble(init, tab, opt, 200);
  const auto m = rsub::states::build_state_matrix(sp);
  const auto st = rsub::states::stationary_distribution(m);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::fabs(ens.mean[0][i] - 2000.0 * st[i]) <
          3.0 * ens.stderr_[0][i] + 1.0);
  }
}

TEST_CASE("ssa conserves counts exactly per reaction kind") {
  const auto sp = set1();
  SUBCASE("monomolecular keeps A+B") {
    EventTable tab;
    tab.params = sp;
    ReactionSpec rs;
    rs.kind = ReactionKind::monomolecular;
    rs.scaling = RateScaling::model_I;
    rs.k = 0.05;
    rs.ell = 0.1;
    tab.reaction = rs;
    auto init = LatticeState::zeros(2, 4, 4, 0.125);
    init.at(0, 0, 1) = 300;
    init.at(1, 2, 2) = 200;
    SsaOptions opt;
    opt.t_end = 0.02;
    opt.seed = 5;
    opt.sample_times = {0.005, 0.01, 0.02};
    const auto run = ssa_run(init, tab, opt);
    CHECK(run.n_events > 100);
    for (const auto& counts : run.counts) {
      long long tot = 0;
      for (long long c : counts) tot += c;
      CHECK(tot == 500);
    }
  }
  SUBCASE("bimolecular keeps A+C and B+C") {
    EventTable tab;
    tab.params = sp;
    tab.count_scale = 1e4;
    ReactionSpec rs;
    rs.kind = ReactionKind::bimolecular;
    rs.scaling = RateScaling::cross_state;
    rs.k = 37.5;
    rs.ell = 0.25;
    tab.reaction = rs;
    auto init = LatticeState::zeros(3, 4, 2, 0.5);
    init.at(0, 1, 0) = 150;
    init.at(1, 1, 0) = 120;
    init.at(2, 3, 1) = 80;
    SsaOptions opt;
    opt.t_end = 0.01;
    opt.seed = 17;
    opt.sample_times = {0.002, 0.01};
    const auto run = ssa_run(init, tab, opt);
    for (const auto& counts : run.counts) {
      long long a = 0, b = 0, c = 0;
      for (int i = 0; i < 4; ++i)
        for (int v = 0; v < 2; ++v) {
          a += counts[(0 * 4 + i) * 2 + v];
          b += counts[(1 * 4 + i) * 2 + v];
          c += counts[(2 * 4 + i) * 2 + v];
        }
      CHECK(a + c == 230);
      CHECK(b + c == 200);
    }
  }
}

TEST_CASE("ssa seed determinism") {
  const auto sp = set1();
  EventTable tab;
  tab.params = sp;
  auto init = LatticeState::zeros(1, 4, 4, 0.5);
  init.at(0, 0, 0) = 100;
  SsaOptions opt;
  opt.t_end = 0.01;
  opt.seed = 42;
  opt.sample_times = {0.01};
  const auto r1 = ssa_run(init, tab, opt);
  const auto r2 = ssa_run(init, tab, opt);
  CHECK(r1.n_events == r2.n_events);
  CHECK(r1.counts == r2.counts);
}

TEST_CASE("production/annihilation stationary mean matches the ODE fixed point") {
  const auto sp = set1();
  EventTable tab;
  tab.params = sp;
  tab.diffusion = false;
  const double k = 0.02, khat = 0.4;
  tab.production.resize(4);
  tab.annihilation.resize(4);
  for (int i = 0; i < 4; ++i) {
    tab.production[i] = k / sp.tau_i[i];
    tab.annihilation[i] = khat / sp.tau_i[i];
  }
  auto init = LatticeState::zeros(1, 4, 1, 1.0);
  SsaOptions opt;
  opt.t_end = 0.1;
  opt.seed = 31;
  opt.sample_times = {0.1};
  const auto ens = ssa_ensemble(init, tab, opt, 600);
  // fixed point of dy/dt = A y + p - khat T y
  const auto m = rsub::states::build_state_matrix(sp);
  Eigen::VectorXd p(4);
  for (int i = 0; i < 4; ++i) p[i] = k / sp.tau_i[i];
  const Eigen::MatrixXd M = m.A - khat * m.T;
  const Eigen::VectorXd fixed = (-M).lu().solve(p);
  for (int i = 0; i < 4; ++i)
    CHECK(std::fabs(ens.mean[0][i] - fixed[i]) < 3.0 * ens.stderr_[0][i] + 0.05);
}

TEST_CASE("ensemble_mean degenerate runs have zero stderr") {
  SsaResult a;
  a.times = {1.0};
  a.counts = {{5, 7}};
  const auto e = ensemble_mean({a, a, a});
  CHECK(e.mean[0][0] == doctest::Approx(5.0));
  CHECK(e.stderr_[0][0] == doctest::Approx(0.0));
}

TEST_CASE("ctrw Brownian limit") {
  const auto sp = single_state(1e-3, 0.5e-3);
  const double D = sp.sigma2 / sp.tau_i[0];
  CtrwOptions opt;
  opt.n_particles = 100000;
  opt.t_end = 0.2;
  opt.seed = 11;
  const auto msd = ctrw_msd(sp, opt, {0.05, 0.1, 0.2});
  for (auto [t, m] : msd)
    CHECK(m == doctest::Approx(2.0 * D * t).epsilon(0.05));
}

TEST_CASE("ctrw trajectories are reproducible and ordered") {
  const auto sp = set1();
  CtrwOptions opt;
  opt.n_particles = 3;
  opt.t_end = 0.01;
  opt.seed = 13;
  const auto tr1 = ctrw_sample(sp, opt, 3);
  const auto tr2 = ctrw_sample(sp, opt, 3);
  REQUIRE(tr1.size() == 3);
  for (size_t p = 0; p < 3; ++p) {
    CHECK(tr1[p].positions == tr2[p].positions);
    for (size_t i = 1; i < tr1[p].times.size(); ++i)
      CHECK(tr1[p].times[i] > tr1[p].times[i - 1]);
  }
}

TEST_CASE("ctrw early-time slope is ordinary") {
  const auto sp = set1();
  CtrwOptions opt;
  opt.n_particles = 200000;
  opt.t_end = sp.tau_i[0] / 10.0;
  opt.seed = 23;
  std::vector<double> ts;
  for (int i = 0; i <= 8; ++i)
    ts.push_back(sp.tau_i[0] / 100.0 * std::pow(10.0, i / 8.0));
  const auto msd = ctrw_msd(sp, opt, ts);
  // log-log regression
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [t, m] : msd) {
    const double X = std::log(t), Y = std::log(m);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
  }
  const int n = (int)msd.size();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
}
