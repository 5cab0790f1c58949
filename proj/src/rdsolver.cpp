#include "rsub/rdsolver.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rsub::rdsolver {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Block-tridiagonal solver for the time-independent Crank-Nicolson system.
// Diagonal blocks vary only at the boundary cells; off-diagonal blocks are
// one constant diagonal matrix E.
class BlockThomas {
 public:
  BlockThomas(const std::vector<Eigen::MatrixXd>& diag, const Eigen::VectorXd& e)
      : n_((int)diag.size()), b_((int)e.size()), E_(e) {
    lus_.reserve(n_);
    Eigen::MatrixXd dtil = diag[0];
    lus_.emplace_back(dtil);
    G_.resize(n_);
    for (int j = 1; j < n_; ++j) {
      // G_j = Dtil_{j-1}^{-1} E
      G_[j] = lus_.back().solve(E_.asDiagonal().toDenseMatrix());
      dtil = diag[j] - E_.asDiagonal() * G_[j];
      lus_.emplace_back(dtil);
    }
  }

  void solve(Eigen::VectorXd& x) const {
    // forward elimination
    std::vector<Eigen::VectorXd> c(n_);
    c[0] = x.segment(0, b_);
    for (int j = 1; j < n_; ++j) {
      c[j] = x.segment((size_t)j * b_, b_) -
             E_.asDiagonal() * lus_[j - 1].solve(c[j - 1]);
    }
    Eigen::VectorXd xj = lus_[n_ - 1].solve(c[n_ - 1]);
    x.segment((size_t)(n_ - 1) * b_, b_) = xj;
    for (int j = n_ - 2; j >= 0; --j) {
      xj = lus_[j].solve(c[j] - E_.asDiagonal().toDenseMatrix() * xj);
      x.segment((size_t)j * b_, b_) = xj;
    }
  }

 private:
  int n_, b_;
  Eigen::VectorXd E_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lus_;
  std::vector<Eigen::MatrixXd> G_;
};

}  // namespace

Grid1D Grid1D::make(double lo, double hi, int nx) {
  require(nx >= 3, "Grid1D: nx >= 3");
  require(hi > lo, "Grid1D: x_hi > x_lo");
  Grid1D g;
  g.x_lo = lo;
  g.x_hi = hi;
  g.nx = nx;
  g.h = (hi - lo) / nx;
  g.x.resize(nx);
  for (int j = 0; j < nx; ++j) g.x[j] = lo + g.h * (j + 0.5);
  return g;
}

int SystemDef::n_species() const {
  if (!reaction) return 1;
  switch (reaction->kind) {
    case states::ReactionKind::annihilation:
      return 1;
    case states::ReactionKind::monomolecular:
      return 2;
    case states::ReactionKind::bimolecular:
      return 3;
  }
  return 1;
}

std::vector<std::string> SystemDef::species_names() const {
  static const std::vector<std::string> all{"A", "B", "C"};
  return {all.begin(), all.begin() + n_species()};
}

FieldSet gaussian_ic(const Grid1D& g, const SystemDef& sys, double variance,
                     double center, const std::vector<double>& species_scales,
                     const std::vector<double>& weights) {
  require(variance > 0.0, "gaussian_ic: variance > 0");
  const int ns = sys.n_species();
  const int nst = sys.params.n_states;
  require((int)species_scales.size() == ns, "gaussian_ic: species_scales size");
  require((int)weights.size() == nst, "gaussian_ic: weights size");
  FieldSet f;
  f.grid = g;
  f.n_species = ns;
  f.n_states = nst;
  f.data.assign((size_t)g.nx * ns * nst, 0.0);
  std::vector<double> gv(g.nx);
  double sum = 0.0;
  for (int j = 0; j < g.nx; ++j) {
    gv[j] = std::exp(-(g.x[j] - center) * (g.x[j] - center) / (2.0 * variance));
    sum += gv[j];
  }
  for (int j = 0; j < g.nx; ++j) gv[j] /= sum;  // unit discrete sum
  for (int j = 0; j < g.nx; ++j)
    for (int s = 0; s < ns; ++s)
      for (int i = 0; i < nst; ++i)
        f.at(j, s, i) = species_scales[s] * weights[i] * gv[j];
  return f;
}

namespace {

// Per-cell linear coupling (state exchange + linear reaction terms) for the
// stacked species-state block.
Eigen::MatrixXd cell_coupling(const SystemDef& sys,
                              const states::StateMatrixSet& m) {
  const int ns = sys.n_species();
  const int n = sys.params.n_states;
  const int b = ns * n;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(b, b);
  for (int s = 0; s < ns; ++s) R.block(s * n, s * n, n, n) = m.A;
  if (!sys.reaction) return R;
  const auto& rs = *sys.reaction;
  if (rs.kind == states::ReactionKind::annihilation) {
    const auto ops = states::build_reaction_ops(rs, sys.params);
    R.topLeftCorner(n, n) -= ops.K1;
  } else if (rs.kind == states::ReactionKind::monomolecular) {
    const auto ops = states::build_reaction_ops(rs, sys.params);
    R.block(0, 0, n, n) -= ops.K1;
    R.block(0, n, n, n) += ops.L2;
    R.block(n, 0, n, n) += ops.K2;
    R.block(n, n, n, n) -= ops.L1;
  } else {
    // bimolecular: the backward (L) terms are linear in w
    const auto t = states::build_bimol_tensors(rs, sys.params);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          R(i, 2 * n + j) += t.lv(i, k, j);      // du_i/dw_j
          R(n + i, 2 * n + j) += t.lv(k, i, j);  // dv_i/dw_j
        }
    for (int i = 0; i < n; ++i) {
      double loss = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) loss += t.lv(j, k, i);
      R(2 * n + i, 2 * n + i) -= loss;
    }
  }
  return R;
}

}  // namespace

std::vector<Snapshot> integrate(const SystemDef& sys, const FieldSet& f0,
                                const IntegrateOptions& opt,
                                bool* negativity_warned) {
  require(opt.dt > 0.0, "integrate: dt > 0");
  const int nx = f0.grid.nx;
  const int ns = sys.n_species();
  const int n = sys.params.n_states;
  const int b = ns * n;
  require(f0.n_species == ns && f0.n_states == n, "integrate: field shape");
  const double h = f0.grid.h;

  const auto m = states::build_state_matrix(sys.params, true);
  const Eigen::MatrixXd R = cell_coupling(sys, m);

  // diffusion coefficients per block entry
  Eigen::VectorXd d(b);
  for (int s = 0; s < ns; ++s)
    for (int i = 0; i < n; ++i)
      d[s * n + i] = sys.params.sigma2 / sys.params.tau_i[i] / (h * h);

  const double dt = opt.dt;
  // LHS diagonal blocks: I - dt/2 (R + diffusion); off blocks: -dt/2 diag(d)
  std::vector<Eigen::MatrixXd> lhs_diag(nx);
  std::vector<Eigen::MatrixXd> rhs_diag(nx);
  for (int j = 0; j < nx; ++j) {
    const double nb = (j == 0 || j == nx - 1) ? 1.0 : 2.0;
    Eigen::MatrixXd Fj = R;
    Fj.diagonal() -= nb * d;
    lhs_diag[j] = Eigen::MatrixXd::Identity(b, b) - 0.5 * dt * Fj;
    rhs_diag[j] = Eigen::MatrixXd::Identity(b, b) + 0.5 * dt * Fj;
  }
  const Eigen::VectorXd e_off = -0.5 * dt * d;
  BlockThomas solver(lhs_diag, e_off);

  // optional nonlinear (bimolecular forward) terms
  std::optional<states::BimolTensors> tensors;
  if (sys.reaction && sys.reaction->kind == states::ReactionKind::bimolecular)
    tensors = states::build_bimol_tensors(*sys.reaction, sys.params);

  const long steps = std::lround(opt.t_end / dt);
  require(std::fabs(steps * dt - opt.t_end) < 1e-9 * std::max(opt.t_end, dt),
          "integrate: t_end must be a multiple of dt");

  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(f0.data.data(),
                                                        (Eigen::Index)f0.data.size());
  std::vector<Snapshot> out;
  FieldSet scratch = f0;
  double last_pushed = -1.0;
  auto push = [&](double t) {
    last_pushed = t;
    scratch.time = t;
    Eigen::Map<Eigen::VectorXd>(scratch.data.data(), u.size()) = u;
    if (opt.observer) {
      opt.observer(t, scratch);
      return;
    }
    Snapshot s;
    s.t = t;
    s.fields = scratch;
    out.push_back(std::move(s));
  };
  if (opt.observe_every > 0) push(0.0);

  Eigen::VectorXd rhs(u.size()), fnl(u.size());
  bool warned = false;
  for (long step = 0; step < steps; ++step) {
    // rhs = (I + dt/2 F) u + dt F_nl(u)
    for (int j = 0; j < nx; ++j) {
      auto uj = u.segment((size_t)j * b, b);
      auto rj = rhs.segment((size_t)j * b, b);
      rj = rhs_diag[j] * uj;
      if (j > 0) rj += 0.5 * dt * d.cwiseProduct(u.segment((size_t)(j - 1) * b, b));
      if (j < nx - 1)
        rj += 0.5 * dt * d.cwiseProduct(u.segment((size_t)(j + 1) * b, b));
    }
    if (tensors) {
      const auto& t = *tensors;
      for (int j = 0; j < nx; ++j) {
        auto uj = u.segment((size_t)j * b, n);
        auto vj = u.segment((size_t)j * b + n, n);
        auto rj = rhs.segment((size_t)j * b, b);
        for (int i = 0; i < n; ++i) {
          double lossu = 0.0, lossv = 0.0;
          for (int jj = 0; jj < n; ++jj) {
            double su = 0.0, sv = 0.0;
            for (int k = 0; k < n; ++k) {
              su += t.kv(i, jj, k);
              sv += t.kv(jj, i, k);
            }
            lossu += su * vj[jj];
            lossv += sv * uj[jj];
          }
          rj[i] -= dt * uj[i] * lossu;
          rj[n + i] -= dt * vj[i] * lossv;
        }
        for (int k = 0; k < n; ++k) {
          double gain = 0.0;
          for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) gain += t.kv(i, jj, k) * uj[i] * vj[jj];
          rj[2 * n + k] += dt * gain;
        }
      }
    }
    solver.solve(rhs);
    u.swap(rhs);
    const double t = (step + 1) * dt;

    const double mn = u.minCoeff();
    if (mn < opt.negativity_warn) {
      warned = true;
      const double mx = u.maxCoeff();
      if (mn < -opt.negativity_abort_frac * std::max(mx, 1e-300)) {
        throw IntegrationError("integrate: field negativity beyond tolerance",
                               t, mn);
      }
    }
    if (!u.allFinite())
      throw IntegrationError("integrate: non-finite field values", t,
                             std::numeric_limits<double>::quiet_NaN());

    if (opt.observe_every > 0 && (step + 1) % opt.observe_every == 0) push(t);
  }
  if (last_pushed != steps * dt) push(steps * dt);
  if (opt.observer) {
    Snapshot s;
    s.t = steps * dt;
    s.fields = scratch;
    s.fields.time = steps * dt;
    Eigen::Map<Eigen::VectorXd>(s.fields.data.data(), u.size()) = u;
    out.push_back(std::move(s));
  }
  if (negativity_warned) *negativity_warned = warned;
  return out;
}

std::vector<std::vector<double>> observable_sum(const FieldSet& f) {
  std::vector<std::vector<double>> out(f.n_species,
                                       std::vector<double>(f.grid.nx, 0.0));
  for (int j = 0; j < f.grid.nx; ++j)
    for (int s = 0; s < f.n_species; ++s)
      for (int i = 0; i < f.n_states; ++i) out[s][j] += f.at(j, s, i);
  return out;
}

std::map<std::string, double> conserved_totals(const FieldSet& f,
                                               const SystemDef& sys) {
  const auto sums = observable_sum(f);
  const double h = f.grid.h;
  std::vector<double> tot(f.n_species, 0.0);
  for (int s = 0; s < f.n_species; ++s)
    for (double v : sums[s]) tot[s] += h * v;
  std::map<std::string, double> out;
  const auto names = sys.species_names();
  for (int s = 0; s < f.n_species; ++s) out["total_" + names[s]] = tot[s];
  if (!sys.reaction) return out;
  switch (sys.reaction->kind) {
    case states::ReactionKind::monomolecular:
      out["total_A_plus_B"] = tot[0] + tot[1];
      break;
    case states::ReactionKind::bimolecular:
      out["total_A_plus_C"] = tot[0] + tot[2];
      out["total_B_plus_C"] = tot[1] + tot[2];
      break;
    default:
      break;
  }
  return out;
}

}  // namespace rsub::rdsolver
