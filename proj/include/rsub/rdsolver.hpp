#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsub/states.hpp"
#include "rsub/wtfit.hpp"

namespace rsub::rdsolver {

struct Grid1D {
  double x_lo = -1.0, x_hi = 1.0;
  int nx = 128;
  double h = 0.0;
  std::vector<double> x;  // cell centers

  static Grid1D make(double lo, double hi, int nx);
};

struct FieldSet {
  Grid1D grid;
  int n_species = 1;
  int n_states = 1;
  double time = 0.0;
  // layout: cell-major, then species, then state
  std::vector<double> data;

  double& at(int cell, int species, int state) {
    return data[(size_t)(cell * n_species + species) * n_states + state];
  }
  double at(int cell, int species, int state) const {
    return data[(size_t)(cell * n_species + species) * n_states + state];
  }
};

struct SystemDef {
  wtfit::StateParams params;
  std::optional<states::ReactionSpec> reaction;

  // species count follows the reaction kind: A / A,B / A,B,C
  int n_species() const;
  std::vector<std::string> species_names() const;
};

// Gaussian initial condition, normalized to unit discrete sum; state i of
// species s gets species_scales[s] * weights[i] * g(x_j).
FieldSet gaussian_ic(const Grid1D& g, const SystemDef& sys, double variance,
                     double center, const std::vector<double>& species_scales,
                     const std::vector<double>& weights);

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t, double worst)
      : std::runtime_error(what), time(t), worst_value(worst) {}
  double time;
  double worst_value;
};

struct IntegrateOptions {
  double dt = 1e-5;
  double t_end = 1e-2;
  int observe_every = 0;     // 0: only the final state is returned
  double negativity_warn = -1e-12;
  double negativity_abort_frac = 1e-6;  // abort at -frac * field max
  // streaming observer: called at the cadence instead of storing snapshots
  std::function<void(double, const FieldSet&)> observer;
};

struct Snapshot {
  double t;
  FieldSet fields;
};

// Crank-Nicolson on the linear operator (diffusion, state exchange, linear
// reaction terms); nonlinear bimolecular terms evaluated explicitly at the
// old time level. The linear operator is factored once.
std::vector<Snapshot> integrate(const SystemDef& sys, const FieldSet& f0,
                                const IntegrateOptions& opt,
                                bool* negativity_warned = nullptr);

// Pointwise sums over internal states, one vector per species.
std::vector<std::vector<double>> observable_sum(const FieldSet& f);

// h * sum of each conserved combination for the system kind.
std::map<std::string, double> conserved_totals(const FieldSet& f,
                                               const SystemDef& sys);

}  // namespace rsub::rdsolver
