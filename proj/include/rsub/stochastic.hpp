#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsub/states.hpp"
#include "rsub/wtfit.hpp"

namespace rsub::stochastic {

struct LatticeState {
  int n_voxels = 1;
  double h = 1.0;  // voxel spacing, m
  int n_species = 1;
  int n_states = 1;
  double time = 0.0;
  std::vector<long long> counts;  // (species, state, voxel)

  long long& at(int species, int state, int voxel) {
    return counts[(size_t)(species * n_states + state) * n_voxels + voxel];
  }
  long long at(int species, int state, int voxel) const {
    return counts[(size_t)(species * n_states + state) * n_voxels + voxel];
  }

  static LatticeState zeros(int n_species, int n_states, int n_voxels, double h);
};

// Event channels of the lattice model: internal-state changes, nearest
// neighbour diffusion with reflecting ends, and the reaction channels of the
// configured kind. count_scale converts counts to concentrations:
// concentration = count / (count_scale * h).
struct EventTable {
  wtfit::StateParams params;
  std::optional<states::ReactionSpec> reaction;
  std::vector<double> production;  // optional per-state production rate, per voxel
  std::vector<double> annihilation;  // optional per-state decay rate (per molecule)
  double count_scale = 1.0;
  bool diffusion = true;
  bool state_changes = true;
};

struct SsaOptions {
  double t_end = 1.0;
  std::uint64_t seed = 1;
  std::vector<double> sample_times;  // states are recorded at these times
};

struct SsaResult {
  std::vector<double> times;
  std::vector<std::vector<long long>> counts;  // one state vector per sample
  long long n_events = 0;
};

SsaResult ssa_run(const LatticeState& initial, const EventTable& table,
                  const SsaOptions& opt);

// Ensemble mean and standard error across replicas (replica r is seeded with
// opt.seed + r).
struct Ensemble {
  std::vector<double> times;
  std::vector<std::vector<double>> mean;    // per sample, per state entry
  std::vector<std::vector<double>> stderr_;
};

Ensemble ssa_ensemble(const LatticeState& initial, const EventTable& table,
                      const SsaOptions& opt, int replicas);

Ensemble ensemble_mean(const std::vector<SsaResult>& runs);

// Multistate CTRW particle trajectory: per jump a state is drawn from the
// normalized weights, the waiting time is exponential with mean tau_i, the
// displacement Gaussian with variance 2 sigma^2. Free space.
struct Trajectory {
  std::vector<double> times;      // strictly increasing jump times
  std::vector<double> positions;  // position after each jump
  std::uint64_t seed = 0;
};

struct CtrwOptions {
  int n_particles = 1000;
  double t_end = 1.0;
  std::uint64_t seed = 1;
  double x0_variance = 0.0;  // Gaussian spread of the initial position
};

std::vector<Trajectory> ctrw_sample(const wtfit::StateParams& sp,
                                    const CtrwOptions& opt, int max_particles);

// Memory-light ensemble second moment at the given sample times.
std::vector<std::pair<double, double>> ctrw_msd(
    const wtfit::StateParams& sp, const CtrwOptions& opt,
    const std::vector<double>& sample_times);

}  // namespace rsub::stochastic
