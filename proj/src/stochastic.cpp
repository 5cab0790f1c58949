#include "rsub/stochastic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rsub::stochastic {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double uniform01(std::mt19937_64& rng) {
  return ((rng() >> 11) + 0.5) * 0x1.0p-53;
}

double normal01(std::mt19937_64& rng) {
  const double u1 = uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int pick(const std::vector<double>& w, double total, std::mt19937_64& rng) {
  double r = uniform01(rng) * total;
  for (size_t i = 0; i + 1 < w.size(); ++i) {
    r -= w[i];
    if (r <= 0.0) return (int)i;
  }
  return (int)w.size() - 1;
}

enum class Ev : char {
  state_change,
  diffusion,
  mono_fwd,
  mono_bwd,
  bi_fwd,
  bi_bwd,
  production,
  decay
};

struct Channel {
  Ev type;
  int species = 0;
  int i = 0;   // state (or A-state for bi_fwd)
  int j = 0;   // partner state / diffusion direction (-1, +1)
  double prop = 0.0;
};

struct Engine {
  const EventTable& tab;
  LatticeState st;
  int n, ns, nv;
  double jump_coeff;  // sigma^2 / h^2
  // mono operator rows
  Eigen::MatrixXd Kmat, Lmat;
  std::vector<double> K_rowsum, L_rowsum;
  states::BimolTensors tensors;
  std::vector<double> bi_fwd_rate;  // sum_k K_{ijk}
  std::vector<double> bi_bwd_rate;  // sum_ij L_{ijk}
  std::vector<std::vector<Channel>> chans;  // per voxel
  std::vector<double> voxel_total;

  Engine(const LatticeState& initial, const EventTable& table)
      : tab(table), st(initial) {
    n = st.n_states;
    ns = st.n_species;
    nv = st.n_voxels;
    jump_coeff = tab.params.sigma2 / (st.h * st.h);
    if (tab.reaction) {
      const auto& rs = *tab.reaction;
      if (rs.kind == states::ReactionKind::monomolecular) {
        // rate matrix K with row sums: A_j -> B_i at K(j,i)
        const auto ops = states::build_reaction_ops(rs, tab.params);
        Kmat = ops.K2.transpose();
        Lmat = ops.L2.transpose();
        K_rowsum.resize(n);
        L_rowsum.resize(n);
        for (int i = 0; i < n; ++i) {
          K_rowsum[i] = Kmat.row(i).sum();
          L_rowsum[i] = Lmat.row(i).sum();
        }
      } else if (rs.kind == states::ReactionKind::annihilation) {
        const auto ops = states::build_reaction_ops(rs, tab.params);
        Kmat = ops.K1;
      } else {
        tensors = states::build_bimol_tensors(rs, tab.params);
        bi_fwd_rate.assign((size_t)n * n, 0.0);
        bi_bwd_rate.assign(n, 0.0);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              bi_fwd_rate[(size_t)i * n + j] += tensors.kv(i, j, k);
              bi_bwd_rate[k] += tensors.lv(i, j, k);
            }
      }
    }
    chans.resize(nv);
    voxel_total.assign(nv, 0.0);
    for (int k = 0; k < nv; ++k) build_voxel(k);
  }

  void build_voxel(int k) {
    auto& c = chans[k];
    c.clear();
    for (int s = 0; s < ns; ++s)
      for (int i = 0; i < n; ++i) {
        if (tab.state_changes)
          c.push_back({Ev::state_change, s, i, 0, 0.0});
        if (tab.diffusion) {
          if (k > 0) c.push_back({Ev::diffusion, s, i, -1, 0.0});
          if (k < nv - 1) c.push_back({Ev::diffusion, s, i, +1, 0.0});
        }
      }
    if (tab.reaction) {
      switch (tab.reaction->kind) {
        case states::ReactionKind::annihilation:
          for (int i = 0; i < n; ++i) c.push_back({Ev::decay, 0, i, 0, 0.0});
          break;
        case states::ReactionKind::monomolecular:
          for (int i = 0; i < n; ++i) {
            c.push_back({Ev::mono_fwd, 0, i, 0, 0.0});
            c.push_back({Ev::mono_bwd, 1, i, 0, 0.0});
          }
          break;
        case states::ReactionKind::bimolecular:
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              c.push_back({Ev::bi_fwd, 0, i, j, 0.0});
          for (int k2 = 0; k2 < n; ++k2)
            c.push_back({Ev::bi_bwd, 2, k2, 0, 0.0});
          break;
      }
    }
    if (!tab.production.empty())
      for (int i = 0; i < n; ++i) c.push_back({Ev::production, 0, i, 0, 0.0});
    if (!tab.annihilation.empty())
      for (int i = 0; i < n; ++i) c.push_back({Ev::decay, 0, i, 1, 0.0});
    refresh(k);
  }

  double rate_state_change(int i) const { return 1.0 / tab.params.tau_i[i]; }

  void refresh(int k) {
    double tot = 0.0;
    for (auto& ch : chans[k]) {
      double p = 0.0;
      const double y = (double)st.at(ch.species, ch.i, k);
      switch (ch.type) {
        case Ev::state_change:
          p = y * rate_state_change(ch.i);
          break;
        case Ev::diffusion:
          p = y * jump_coeff / tab.params.tau_i[ch.i];
          break;
        case Ev::mono_fwd:
          p = y * K_rowsum[ch.i];
          break;
        case Ev::mono_bwd:
          p = y * L_rowsum[ch.i];
          break;
        case Ev::decay:
          if (tab.reaction && ch.j == 0)
            p = y * Kmat(ch.i, ch.i);
          else
            p = y * tab.annihilation[ch.i];
          break;
        case Ev::production:
          p = tab.production[ch.i];
          break;
        case Ev::bi_fwd:
          p = bi_fwd_rate[(size_t)ch.i * n + ch.j] * (double)st.at(0, ch.i, k) *
              (double)st.at(1, ch.j, k) / (tab.count_scale * st.h);
          break;
        case Ev::bi_bwd:
          p = bi_bwd_rate[ch.i] * (double)st.at(2, ch.i, k);
          break;
      }
      ch.prop = p;
      tot += p;
    }
    voxel_total[k] = tot;
  }

  double total() const {
    double t = 0.0;
    for (double v : voxel_total) t += v;
    return t;
  }

  // returns the voxel(s) whose propensities changed
  void fire(int k, const Channel& ch, std::mt19937_64& rng, int& other) {
    other = -1;
    const auto& mu = tab.params.mu_i;
    switch (ch.type) {
      case Ev::state_change: {
        double r = uniform01(rng);
        int tgt = n - 1;
        for (int i = 0; i < n - 1; ++i) {
          r -= mu[i];
          if (r <= 0.0) {
            tgt = i;
            break;
          }
        }
        st.at(ch.species, ch.i, k)--;
        st.at(ch.species, tgt, k)++;
        break;
      }
      case Ev::diffusion:
        st.at(ch.species, ch.i, k)--;
        st.at(ch.species, ch.i, k + ch.j)++;
        other = k + ch.j;
        break;
      case Ev::mono_fwd: {
        std::vector<double> row(n);
        for (int i = 0; i < n; ++i) row[i] = Kmat(ch.i, i);
        const int tgt = pick(row, K_rowsum[ch.i], rng);
        st.at(0, ch.i, k)--;
        st.at(1, tgt, k)++;
        break;
      }
      case Ev::mono_bwd: {
        std::vector<double> row(n);
        for (int i = 0; i < n; ++i) row[i] = Lmat(ch.i, i);
        const int tgt = pick(row, L_rowsum[ch.i], rng);
        st.at(1, ch.i, k)--;
        st.at(0, tgt, k)++;
        break;
      }
      case Ev::decay:
        st.at(0, ch.i, k)--;
        break;
      case Ev::production:
        st.at(0, ch.i, k)++;
        break;
      case Ev::bi_fwd: {
        std::vector<double> w(n);
        for (int kk = 0; kk < n; ++kk) w[kk] = tensors.kv(ch.i, ch.j, kk);
        const int tgt = pick(w, bi_fwd_rate[(size_t)ch.i * n + ch.j], rng);
        st.at(0, ch.i, k)--;
        st.at(1, ch.j, k)--;
        st.at(2, tgt, k)++;
        break;
      }
      case Ev::bi_bwd: {
        std::vector<double> w((size_t)n * n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            w[(size_t)i * n + j] = tensors.lv(i, j, ch.i);
        const int ij = pick(w, bi_bwd_rate[ch.i], rng);
        st.at(2, ch.i, k)--;
        st.at(0, ij / n, k)++;
        st.at(1, ij % n, k)++;
        break;
      }
    }
  }
};

}  // namespace

LatticeState LatticeState::zeros(int n_species, int n_states, int n_voxels,
                                 double h) {
  LatticeState s;
  s.n_species = n_species;
  s.n_states = n_states;
  s.n_voxels = n_voxels;
  s.h = h;
  s.counts.assign((size_t)n_species * n_states * n_voxels, 0);
  return s;
}

SsaResult ssa_run(const LatticeState& initial, const EventTable& table,
                  const SsaOptions& opt) {
  require(!table.params.mu_i.empty(), "ssa_run: EventTable needs StateParams");
  Engine eng(initial, table);
  std::mt19937_64 rng(opt.seed);
  SsaResult res;
  size_t next_sample = 0;
  double t = initial.time;
  auto record_until = [&](double tnow) {
    while (next_sample < opt.sample_times.size() &&
           opt.sample_times[next_sample] <= tnow) {
      res.times.push_back(opt.sample_times[next_sample]);
      res.counts.push_back(eng.st.counts);
      ++next_sample;
    }
  };
  while (t < opt.t_end) {
    const double total = eng.total();
    if (total <= 0.0) break;
    const double dt = -std::log(uniform01(rng)) / total;
    const double tnew = t + dt;
    record_until(std::min(tnew, opt.t_end));
    if (tnew >= opt.t_end) {
      t = opt.t_end;
      break;
    }
    t = tnew;
    // select voxel then channel
    double r = uniform01(rng) * total;
    int k = eng.nv - 1;
    for (int v = 0; v < eng.nv; ++v) {
      r -= eng.voxel_total[v];
      if (r <= 0.0) {
        k = v;
        break;
      }
    }
    double r2 = uniform01(rng) * eng.voxel_total[k];
    const Channel* sel = &eng.chans[k].back();
    for (const auto& ch : eng.chans[k]) {
      r2 -= ch.prop;
      if (r2 <= 0.0) {
        sel = &ch;
        break;
      }
    }
    int other = -1;
    Channel fired = *sel;  // copy; refresh invalidates references
    eng.fire(k, fired, rng, other);
    eng.refresh(k);
    if (other >= 0) eng.refresh(other);
    ++res.n_events;
  }
  record_until(opt.t_end);
  // any remaining samples get the final state
  while (next_sample < opt.sample_times.size()) {
    res.times.push_back(opt.sample_times[next_sample]);
    res.counts.push_back(eng.st.counts);
    ++next_sample;
  }
  return res;
}

Ensemble ensemble_mean(const std::vector<SsaResult>& runs) {
  require(runs.size() >= 2, "ensemble_mean: need at least 2 runs");
  const size_t ns = runs[0].times.size();
  const size_t ne = runs[0].counts.empty() ? 0 : runs[0].counts[0].size();
  Ensemble e;
  e.times = runs[0].times;
  e.mean.assign(ns, std::vector<double>(ne, 0.0));
  e.stderr_.assign(ns, std::vector<double>(ne, 0.0));
  const double R = (double)runs.size();
  for (const auto& run : runs) {
    require(run.times.size() == ns, "ensemble_mean: inconsistent sampling");
    for (size_t s = 0; s < ns; ++s)
      for (size_t i = 0; i < ne; ++i) e.mean[s][i] += (double)run.counts[s][i];
  }
  for (size_t s = 0; s < ns; ++s)
    for (size_t i = 0; i < ne; ++i) e.mean[s][i] /= R;
  for (const auto& run : runs)
    for (size_t s = 0; s < ns; ++s)
      for (size_t i = 0; i < ne; ++i) {
        const double d = (double)run.counts[s][i] - e.mean[s][i];
        e.stderr_[s][i] += d * d;
      }
  for (size_t s = 0; s < ns; ++s)
    for (size_t i = 0; i < ne; ++i)
      e.stderr_[s][i] = std::sqrt(e.stderr_[s][i] / (R * (R - 1.0)));
  return e;
}

Ensemble ssa_ensemble(const LatticeState& initial, const EventTable& table,
                      const SsaOptions& opt, int replicas) {
  std::vector<SsaResult> runs;
  runs.reserve(replicas);
  for (int r = 0; r < replicas; ++r) {
    SsaOptions o = opt;
    o.seed = opt.seed + (std::uint64_t)r;
    runs.push_back(ssa_run(initial, table, o));
  }
  return ensemble_mean(runs);
}

std::vector<Trajectory> ctrw_sample(const wtfit::StateParams& sp,
                                    const CtrwOptions& opt, int max_particles) {
  std::vector<Trajectory> out;
  const int keep = std::min(opt.n_particles, max_particles);
  const double jump_sd = std::sqrt(2.0 * sp.sigma2);
  for (int p = 0; p < keep; ++p) {
    std::mt19937_64 rng(opt.seed + (std::uint64_t)p);
    Trajectory tr;
    tr.seed = opt.seed + (std::uint64_t)p;
    double x = opt.x0_variance > 0.0
                   ? std::sqrt(opt.x0_variance) * normal01(rng)
                   : 0.0;
    double t = 0.0;
    tr.times.push_back(0.0);
    tr.positions.push_back(x);
    while (true) {
      double r = uniform01(rng);
      int state = sp.n_states - 1;
      for (int i = 0; i < sp.n_states - 1; ++i) {
        r -= sp.mu_i[i];
        if (r <= 0.0) {
          state = i;
          break;
        }
      }
      t += -std::log(uniform01(rng)) * sp.tau_i[state];
      if (t > opt.t_end) break;
      x += jump_sd * normal01(rng);
      tr.times.push_back(t);
      tr.positions.push_back(x);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<std::pair<double, double>> ctrw_msd(
    const wtfit::StateParams& sp, const CtrwOptions& opt,
    const std::vector<double>& sample_times) {
  std::vector<double> acc(sample_times.size(), 0.0);
  const double jump_sd = std::sqrt(2.0 * sp.sigma2);
  for (int p = 0; p < opt.n_particles; ++p) {
    std::mt19937_64 rng(opt.seed + (std::uint64_t)p);
    double x = opt.x0_variance > 0.0
                   ? std::sqrt(opt.x0_variance) * normal01(rng)
                   : 0.0;
    double t = 0.0;
    size_t s = 0;
    while (s < sample_times.size()) {
      double r = uniform01(rng);
      int state = sp.n_states - 1;
      for (int i = 0; i < sp.n_states - 1; ++i) {
        r -= sp.mu_i[i];
        if (r <= 0.0) {
          state = i;
          break;
        }
      }
      const double tnext = t + -std::log(uniform01(rng)) * sp.tau_i[state];
      while (s < sample_times.size() && sample_times[s] < tnext) {
        acc[s] += x * x;
        ++s;
      }
      if (tnext > opt.t_end) break;
      t = tnext;
      x += jump_sd * normal01(rng);
    }
    for (; s < sample_times.size(); ++s) acc[s] += x * x;
  }
  std::vector<std::pair<double, double>> out;
  for (size_t s = 0; s < sample_times.size(); ++s)
    out.emplace_back(sample_times[s], acc[s] / opt.n_particles);
  return out;
}

}  // namespace rsub::stochastic
