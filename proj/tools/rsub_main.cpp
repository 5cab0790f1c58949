// Command-line front end: fitting, simulation, analytic references,
// msd/regression, SSA ensembles, steady-state reports, field comparison.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "rsub/analysis.hpp"
#include "rsub/rdsolver.hpp"
#include "rsub/specfun.hpp"
#include "rsub/states.hpp"
#include "rsub/stochastic.hpp"
#include "rsub/wtfit.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// --- config schema ----------------------------------------------------

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ValidationError(path + "/" + it.key() + ": unknown key");
  }
}

void validate_config(const json& c) {
  check_keys(c, "", {"alpha", "K_alpha", "t_min", "t_max", "N", "domain", "nx",
                     "dt", "t_end", "ic", "reaction", "states", "seed",
                     "output", "times", "window", "msd_mode", "stochastic",
                     "fit"});
  if (c.contains("ic"))
    check_keys(c["ic"], "/ic",
               {"variance", "center", "species_scales", "weights"});
  if (c.contains("reaction"))
    check_keys(c["reaction"], "/reaction",
               {"kind", "model", "k", "l", "theta", "k_star", "l_star",
                "K_matrix", "L_matrix", "K_tensor", "L_tensor"});
  if (c.contains("states"))
    check_keys(c["states"], "/states", {"tau_i", "mu_i", "tau", "scale"});
  if (c.contains("output")) check_keys(c["output"], "/output", {"path", "every"});
  if (c.contains("stochastic"))
    check_keys(c["stochastic"], "/stochastic",
               {"replicas", "particles", "count_scale", "x0_variance",
                "sample_times", "voxels"});
  if (c.contains("fit"))
    check_keys(c["fit"], "/fit", {"multistarts", "max_iter", "grid_points"});
  if (c.contains("domain") &&
      (!c["domain"].is_array() || c["domain"].size() != 2))
    throw ValidationError("/domain: expected [lo, hi]");
  if (c.contains("window") &&
      (!c["window"].is_array() || c["window"].size() != 2))
    throw ValidationError("/window: expected [t_a, t_b]");
}

double need_num(const json& c, const std::string& key) {
  if (!c.contains(key) || !c[key].is_number())
    throw ValidationError("/" + key + ": required number missing");
  return c[key].get<double>();
}

// --- building blocks ---------------------------------------------------

rsub::wtfit::FitProblem fit_problem(const json& c) {
  rsub::wtfit::FitProblem p;
  p.alpha = need_num(c, "alpha");
  p.t_min = need_num(c, "t_min");
  p.t_max = need_num(c, "t_max");
  p.n_states = (int)need_num(c, "N");
  if (c.contains("seed")) p.seed = c["seed"].get<std::uint64_t>();
  if (c.contains("fit")) {
    const auto& f = c["fit"];
    if (f.contains("multistarts")) p.multistarts = f["multistarts"].get<int>();
    if (f.contains("max_iter")) p.max_iter = f["max_iter"].get<int>();
    if (f.contains("grid_points")) p.grid_points = f["grid_points"].get<int>();
  }
  return p;
}

rsub::wtfit::StateParams make_state_params(const json& c) {
  if (c.contains("states")) {
    const auto& s = c["states"];
    auto scale = rsub::wtfit::TailScale::tail_consistent;
    if (s.contains("scale")) {
      const std::string v = s["scale"].get<std::string>();
      if (v == "printed")
        scale = rsub::wtfit::TailScale::printed;
      else if (v != "tail_consistent")
        throw ValidationError("/states/scale: printed | tail_consistent");
    }
    return rsub::wtfit::state_params_from_table(
        need_num(c, "alpha"), need_num(c, "K_alpha"),
        s.at("tau_i").get<std::vector<double>>(),
        s.at("mu_i").get<std::vector<double>>(), need_num(s, "tau"), scale);
  }
  const auto p = fit_problem(c);
  const auto fit = rsub::wtfit::fit_exponential_sum(p);
  return rsub::wtfit::to_state_params(fit, need_num(c, "K_alpha"), p);
}

std::optional<rsub::states::ReactionSpec> make_reaction(const json& c) {
  if (!c.contains("reaction")) return std::nullopt;
  const auto& r = c["reaction"];
  rsub::states::ReactionSpec rs;
  const std::string kind = r.at("kind").get<std::string>();
  if (kind == "annihilation")
    rs.kind = rsub::states::ReactionKind::annihilation;
  else if (kind == "monomolecular")
    rs.kind = rsub::states::ReactionKind::monomolecular;
  else if (kind == "bimolecular")
    rs.kind = rsub::states::ReactionKind::bimolecular;
  else
    throw ValidationError("/reaction/kind: unknown kind " + kind);
  const std::string model =
      r.contains("model") ? r["model"].get<std::string>() : "model_I";
  if (model == "model_I")
    rs.scaling = rsub::states::RateScaling::model_I;
  else if (model == "model_II")
    rs.scaling = rsub::states::RateScaling::model_II;
  else if (model == "cross_state")
    rs.scaling = rsub::states::RateScaling::cross_state;
  else if (model == "general")
    rs.scaling = rsub::states::RateScaling::general;
  else
    throw ValidationError("/reaction/model: unknown model " + model);
  if (r.contains("k")) rs.k = r["k"].get<double>();
  if (r.contains("l")) rs.ell = r["l"].get<double>();
  if (r.contains("theta")) rs.theta = r["theta"].get<double>();
  if (r.contains("K_matrix")) {
    const auto rows = r["K_matrix"].get<std::vector<std::vector<double>>>();
    const int n = (int)rows.size();
    rs.K_general.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) rs.K_general(i, j) = rows[i][j];
  }
  if (r.contains("L_matrix")) {
    const auto rows = r["L_matrix"].get<std::vector<std::vector<double>>>();
    const int n = (int)rows.size();
    rs.L_general.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) rs.L_general(i, j) = rows[i][j];
  }
  if (r.contains("K_tensor")) rs.K_tensor = r["K_tensor"].get<std::vector<double>>();
  if (r.contains("L_tensor")) rs.L_tensor = r["L_tensor"].get<std::vector<double>>();
  return rs;
}

struct IcSpec {
  double variance = 1e-3;
  double center = 0.0;
  std::vector<double> scales;   // per species
  std::vector<double> weights;  // per state
};

IcSpec make_ic(const json& c, const rsub::rdsolver::SystemDef& sys) {
  IcSpec ic;
  const auto names = sys.species_names();
  ic.scales.assign(names.size(), 1.0);
  ic.weights = sys.params.raw_weights;
  if (!c.contains("ic")) return ic;
  const auto& j = c["ic"];
  if (j.contains("variance")) ic.variance = j["variance"].get<double>();
  if (j.contains("center")) ic.center = j["center"].get<double>();
  if (j.contains("species_scales")) {
    for (size_t s = 0; s < names.size(); ++s)
      if (j["species_scales"].contains(names[s]))
        ic.scales[s] = j["species_scales"][names[s]].get<double>();
  }
  if (j.contains("weights")) {
    const std::string w = j["weights"].get<std::string>();
    if (w == "normalized")
      ic.weights = sys.params.mu_i;
    else if (w != "raw")
      throw ValidationError("/ic/weights: raw | normalized");
  }
  return ic;
}

rsub::rdsolver::Grid1D make_grid(const json& c) {
  double lo = -1.0, hi = 1.0;
  if (c.contains("domain")) {
    lo = c["domain"][0].get<double>();
    hi = c["domain"][1].get<double>();
  }
  const int nx = c.contains("nx") ? c["nx"].get<int>() : 128;
  return rsub::rdsolver::Grid1D::make(lo, hi, nx);
}

fs::path out_dir(const json& c, const std::string& cli_out) {
  std::string p = cli_out;
  if (p.empty() && c.contains("output") && c["output"].contains("path"))
    p = c["output"]["path"].get<std::string>();
  if (p.empty()) p = ".";
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

// --- subcommands --------------------------------------------------------

int cmd_fit(const json& c, const std::string& out) {
  const auto p = fit_problem(c);
  const double K = need_num(c, "K_alpha");
  const auto fit = rsub::wtfit::fit_exponential_sum(p);
  const auto sp = rsub::wtfit::to_state_params(fit, K, p);
  json j;
  j["alpha"] = p.alpha;
  j["K_alpha"] = K;
  j["t_min"] = p.t_min;
  j["t_max"] = p.t_max;
  j["N"] = p.n_states;
  j["tau_i"] = sp.tau_i;
  j["mu_i"] = sp.mu_i;
  j["raw_weights"] = sp.raw_weights;
  j["tau"] = sp.tau;
  j["sigma2"] = sp.sigma2;
  j["eps_mod"] = fit.eps_mod;
  write_file(out_dir(c, out) / "fit.json", j.dump(2) + "\n");
  return 0;
}

std::vector<rsub::rdsolver::Snapshot> run_simulation(
    const json& c, rsub::rdsolver::SystemDef& sys) {
  sys.params = make_state_params(c);
  sys.reaction = make_reaction(c);
  const auto g = make_grid(c);
  const auto ic = make_ic(c, sys);
  const auto f0 = rsub::rdsolver::gaussian_ic(g, sys, ic.variance, ic.center,
                                              ic.scales, ic.weights);
  rsub::rdsolver::IntegrateOptions opt;
  opt.dt = need_num(c, "dt");
  opt.t_end = need_num(c, "t_end");
  opt.negativity_abort_frac = 1.0;  // stiff sets oscillate transiently
  if (c.contains("output") && c["output"].contains("every"))
    opt.observe_every = c["output"]["every"].get<int>();
  return rsub::rdsolver::integrate(sys, f0, opt);
}

int cmd_simulate(const json& c, const std::string& out) {
  rsub::rdsolver::SystemDef sys;
  const auto snaps = run_simulation(c, sys);
  const auto dir = out_dir(c, out);
  const auto names = sys.species_names();

  std::string full = "t,x,species,state,value\n";
  std::string summed = "t,x";
  for (size_t s = 0; s < names.size(); ++s)
    summed += std::string(",") + (s == 0 ? "U" : s == 1 ? "V" : "W");
  summed += "\n";
  for (const auto& snap : snaps) {
    const auto& f = snap.fields;
    const auto sums = rsub::rdsolver::observable_sum(f);
    for (int j = 0; j < f.grid.nx; ++j) {
      for (int s = 0; s < f.n_species; ++s)
        for (int i = 0; i < f.n_states; ++i)
          full += fmt(snap.t) + "," + fmt(f.grid.x[j]) + "," + names[s] + "," +
                  std::to_string(i + 1) + "," + fmt(f.at(j, s, i)) + "\n";
      summed += fmt(snap.t) + "," + fmt(f.grid.x[j]);
      for (int s = 0; s < f.n_species; ++s) summed += "," + fmt(sums[s][j]);
      summed += "\n";
    }
  }
  write_file(dir / "fields.csv", full);
  write_file(dir / "summed.csv", summed);
  return 0;
}

int cmd_analytic(const json& c, const std::string& out) {
  const double alpha = need_num(c, "alpha");
  if (alpha != 0.5)
    throw ValidationError(
        "/alpha: closed-form references are implemented for alpha = 1/2 only");
  const double K = need_num(c, "K_alpha");
  const auto g = make_grid(c);
  if (!c.contains("times")) throw ValidationError("/times: required");
  const auto times = c["times"].get<std::vector<double>>();

  // masses and optional initial-data convolution from the ic block
  rsub::rdsolver::SystemDef sys;
  sys.params = make_state_params(c);
  sys.reaction = make_reaction(c);
  const auto ic = make_ic(c, sys);
  double wsum = 0.0;
  for (double w : ic.weights) wsum += w;
  std::vector<double> mass(sys.n_species());
  for (int s = 0; s < sys.n_species(); ++s)
    mass[s] = g.h * ic.scales[s] * wsum;
  std::vector<double> gv(g.nx);
  double gs = 0.0;
  for (int j = 0; j < g.nx; ++j) {
    gv[j] = std::exp(-(g.x[j] - ic.center) * (g.x[j] - ic.center) /
                     (2.0 * ic.variance));
    gs += gv[j];
  }
  for (auto& v : gv) v /= gs;

  // macroscopic rates
  double k_star = 0.0, l_star = 0.0;
  rsub::specfun::ReactionModel model = rsub::specfun::ReactionModel::I;
  bool mono = false, ann = false;
  if (sys.reaction) {
    const auto& r = c["reaction"];
    k_star = r.contains("k_star") ? r["k_star"].get<double>() : 0.0;
    l_star = r.contains("l_star") ? r["l_star"].get<double>() : 0.0;
    if (sys.reaction->scaling == rsub::states::RateScaling::model_II)
      model = rsub::specfun::ReactionModel::II;
    mono = sys.reaction->kind == rsub::states::ReactionKind::monomolecular;
    ann = sys.reaction->kind == rsub::states::ReactionKind::annihilation;
    if (sys.reaction->kind == rsub::states::ReactionKind::bimolecular)
      throw ValidationError(
          "/reaction/kind: no closed form for bimolecular systems");
  }

  std::string csv = mono ? "t,x,U,V\n" : "t,x,U\n";
  for (double t : times) {
    for (int j = 0; j < g.nx; ++j) {
      double U = 0.0, V = 0.0;
      for (int k = 0; k < g.nx; ++k) {
        if (gv[k] < 1e-14) continue;
        const double dx = g.x[j] - g.x[k];
        rsub::specfun::GreenCoeffs gc;
        gc.K_alpha = K;
        if (mono) {
          gc.k_star = k_star;
          gc.ell_star = l_star;
          auto [u, v] = rsub::specfun::green_mono_half(model, dx, t, gc,
                                                       mass[0], mass[1]);
          U += gv[k] * u;
          V += gv[k] * v;
        } else if (ann) {
          gc.k_star = k_star;
          gc.mass = mass[0];
          U += gv[k] * rsub::specfun::green_annihilation_half(model, dx, t, gc);
        } else {
          gc.mass = mass[0];
          U += gv[k] * rsub::specfun::green_pure_half(dx, t, gc);
        }
      }
      csv += fmt(t) + "," + fmt(g.x[j]) + "," + fmt(U);
      if (mono) csv += "," + fmt(V);
      csv += "\n";
    }
  }
  write_file(out_dir(c, out) / "analytic.csv", csv);
  return 0;
}

int cmd_msd(const json& c, const std::string& out, bool stochastic) {
  const auto dir = out_dir(c, out);
  std::vector<std::pair<double, double>> series;
  if (stochastic) {
    rsub::stochastic::CtrwOptions opt;
    const auto& s = c.at("stochastic");
    opt.n_particles = s.contains("particles") ? s["particles"].get<int>() : 10000;
    opt.t_end = need_num(c, "t_end");
    if (c.contains("seed")) opt.seed = c["seed"].get<std::uint64_t>();
    if (s.contains("x0_variance")) opt.x0_variance = s["x0_variance"].get<double>();
    std::vector<double> ts;
    if (s.contains("sample_times")) {
      ts = s["sample_times"].get<std::vector<double>>();
    } else {
      for (int i = 0; i <= 60; ++i)
        ts.push_back(opt.t_end * std::pow(10.0, -3.0 + 3.0 * i / 60.0));
    }
    series = rsub::stochastic::ctrw_msd(make_state_params(c), opt, ts);
  } else {
    rsub::rdsolver::SystemDef sys;
    sys.params = make_state_params(c);
    sys.reaction = make_reaction(c);
    const auto g = make_grid(c);
    const auto ic = make_ic(c, sys);
    const auto f0 = rsub::rdsolver::gaussian_ic(g, sys, ic.variance, ic.center,
                                                ic.scales, ic.weights);
    rsub::rdsolver::IntegrateOptions opt;
    opt.dt = need_num(c, "dt");
    opt.t_end = need_num(c, "t_end");
    opt.negativity_abort_frac = 1.0;
    opt.observe_every =
        (c.contains("output") && c["output"].contains("every"))
            ? c["output"]["every"].get<int>()
            : 1;
    opt.observer = [&](double t, const rsub::rdsolver::FieldSet& f) {
      const auto sums = rsub::rdsolver::observable_sum(f);
      series.emplace_back(t, rsub::analysis::msd_of_field(f.grid, sums[0]));
    };
    rsub::rdsolver::integrate(sys, f0, opt);
  }
  std::string csv = "t,msd\n";
  for (auto [t, m] : series) csv += fmt(t) + "," + fmt(m) + "\n";
  write_file(dir / "msd.csv", csv);

  json j;
  if (c.contains("window")) {
    const double a = c["window"][0].get<double>();
    const double b = c["window"][1].get<double>();
    // regressions in log-log need log-uniform samples; pick the nearest
    // available time for each of ~60 log-spaced targets
    std::vector<std::pair<double, double>> pts;
    {
      size_t last = SIZE_MAX;
      for (int q = 0; q <= 60; ++q) {
        const double target = a * std::pow(b / a, q / 60.0);
        size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < series.size(); ++i) {
          if (series[i].first <= 0.0) continue;
          const double d = std::fabs(std::log(series[i].first / target));
          if (d < dist) {
            dist = d;
            best = i;
          }
        }
        if (best != last) pts.push_back(series[best]);
        last = best;
      }
    }
    const std::string mode =
        c.contains("msd_mode") ? c["msd_mode"].get<std::string>() : "raw";
    if (mode == "increment") {
      const double m0 = series.front().second;
      pts.clear();
      for (auto [t, m] : series)
        if (m > m0) pts.emplace_back(t, m - m0);
    } else if (mode != "raw") {
      throw ValidationError("/msd_mode: raw | increment");
    }
    const auto r = rsub::analysis::fit_power_law(pts, a, b);
    j["window"] = {a, b};
    j["mode"] = mode;
    j["exponent"] = r.coefficient;
    j["intercept"] = r.intercept;
    j["residual_norm"] = r.residual_norm;
    write_file(dir / "regression.json", j.dump(2) + "\n");
  }
  return 0;
}

int cmd_ssa(const json& c, const std::string& out) {
  rsub::rdsolver::SystemDef sys;
  sys.params = make_state_params(c);
  sys.reaction = make_reaction(c);
  const auto& s = c.at("stochastic");
  const int voxels = s.contains("voxels") ? s["voxels"].get<int>() : 16;
  const double count_scale =
      s.contains("count_scale") ? s["count_scale"].get<double>() : 1e4;
  const int replicas = s.contains("replicas") ? s["replicas"].get<int>() : 100;

  rsub::rdsolver::Grid1D g = make_grid(c);
  g = rsub::rdsolver::Grid1D::make(g.x_lo, g.x_hi, voxels);
  const auto ic = make_ic(c, sys);
  const auto f0 = rsub::rdsolver::gaussian_ic(g, sys, ic.variance, ic.center,
                                              ic.scales, ic.weights);
  auto lattice = rsub::stochastic::LatticeState::zeros(
      sys.n_species(), sys.params.n_states, voxels, g.h);
  for (int sp = 0; sp < sys.n_species(); ++sp)
    for (int i = 0; i < sys.params.n_states; ++i)
      for (int v = 0; v < voxels; ++v)
        lattice.at(sp, i, v) =
            std::llround(count_scale * g.h * f0.at(v, sp, i));

  rsub::stochastic::EventTable tab;
  tab.params = sys.params;
  tab.reaction = sys.reaction;
  tab.count_scale = count_scale;
  rsub::stochastic::SsaOptions opt;
  opt.t_end = need_num(c, "t_end");
  if (c.contains("seed")) opt.seed = c["seed"].get<std::uint64_t>();
  opt.sample_times = s.contains("sample_times")
                         ? s["sample_times"].get<std::vector<double>>()
                         : std::vector<double>{opt.t_end};
  const auto ens = rsub::stochastic::ssa_ensemble(lattice, tab, opt, replicas);

  const auto names = sys.species_names();
  std::string csv = "t,observable,mean,stderr\n";
  for (size_t ti = 0; ti < ens.times.size(); ++ti) {
    for (int sp = 0; sp < sys.n_species(); ++sp)
      for (int v = 0; v < voxels; ++v) {
        double m = 0.0, se2 = 0.0;
        for (int i = 0; i < sys.params.n_states; ++i) {
          const size_t idx = (size_t)(sp * sys.params.n_states + i) * voxels + v;
          m += ens.mean[ti][idx];
          se2 += ens.stderr_[ti][idx] * ens.stderr_[ti][idx];
        }
        csv += fmt(ens.times[ti]) + "," + names[sp] + ":" + std::to_string(v) +
               "," + fmt(m / (count_scale * g.h)) + "," +
               fmt(std::sqrt(se2) / (count_scale * g.h)) + "\n";
      }
  }
  write_file(out_dir(c, out) / "ensemble.csv", csv);
  return 0;
}

int cmd_steady(const json& c, const std::string& out) {
  const auto sp = make_state_params(c);
  const auto m = rsub::states::build_state_matrix(sp);
  const auto rs = make_reaction(c);
  json j;
  const auto u_inf = rsub::states::stationary_distribution(m);
  j["stationary"] = std::vector<double>(u_inf.data(), u_inf.data() + u_inf.size());
  j["w_matrix_A"] = rsub::states::is_w_matrix(m.A).pass;
  std::vector<double> omegas{1e-3, 1e-1, 1e1, 1e3};
  json gbar = json::array();
  for (double w : omegas)
    gbar.push_back({{"omega", w},
                    {"gamma", rsub::states::longtime_diffusion_coeff(m, w)}});
  j["gamma_bar"] = gbar;
  if (rs && rs->kind != rsub::states::ReactionKind::bimolecular) {
    const auto ops = rsub::states::build_reaction_ops(*rs, sp);
    auto [keq, leq] = rsub::states::equivalent_rates(ops, u_inf, u_inf);
    j["k_eq"] = keq;
    j["l_eq"] = leq;
    const auto kr = rsub::states::kprime_curve(
        m, ops.K1, m.mu_hat, std::vector<double>{});
    j["k_prime_0"] = kr.k0;
    j["k_prime_inf"] = kr.k_inf;
    const auto J = rsub::states::assemble_jacobian(*rs, m, sp);
    j["w_matrix_jacobian"] = rsub::states::is_w_matrix(J.B).pass;
  }
  write_file(out_dir(c, out) / "steady.json", j.dump(2) + "\n");
  return 0;
}

std::vector<std::vector<double>> read_csv_columns(const fs::path& p,
                                                  std::vector<std::string>* hdr) {
  std::ifstream f(p);
  if (!f) throw ValidationError("cannot read " + p.string());
  std::string line;
  std::getline(f, line);
  std::vector<std::string> names;
  for (size_t pos = 0; pos <= line.size();) {
    const size_t c = line.find(',', pos);
    names.push_back(line.substr(pos, c == std::string::npos ? c : c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  if (hdr) *hdr = names;
  std::vector<std::vector<double>> cols(names.size());
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    size_t pos = 0;
    for (size_t k = 0; k < names.size(); ++k) {
      const size_t c = line.find(',', pos);
      const std::string cell =
          line.substr(pos, c == std::string::npos ? c : c - pos);
      try {
        cols[k].push_back(std::stod(cell));
      } catch (...) {
        cols[k].push_back(std::numeric_limits<double>::quiet_NaN());
      }
      pos = (c == std::string::npos) ? line.size() + 1 : c + 1;
    }
  }
  return cols;
}

int cmd_compare(const json& c, const std::string& out, const std::string& fa,
                const std::string& fb) {
  std::vector<std::string> ha, hb;
  const auto a = read_csv_columns(fa, &ha);
  const auto b = read_csv_columns(fb, &hb);
  if (ha != hb) throw ValidationError("compare: headers differ");
  if (a.empty() || a[0].size() != b[0].size())
    throw ValidationError("compare: row counts differ");
  json j;
  for (size_t k = 0; k < ha.size(); ++k) {
    if (ha[k] == "t" || ha[k] == "x" || ha[k] == "species" || ha[k] == "state")
      continue;
    j["eps_tot"][ha[k]] = rsub::analysis::l2_rel_error(a[k], b[k]);
  }
  write_file(out_dir(c, out) / "compare.json", j.dump(2) + "\n");
  return 0;
}

void apply_override(json& c, const std::string& kv) {
  const size_t eq = kv.find('=');
  if (eq == std::string::npos)
    throw ValidationError("--set expects key.path=value");
  const std::string path = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  json* node = &c;
  size_t pos = 0;
  while (true) {
    const size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos
                                                 ? std::string::npos
                                                 : dot - pos);
    if (dot == std::string::npos) {
      try {
        (*node)[key] = json::parse(value);
      } catch (...) {
        (*node)[key] = value;
      }
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reaction-subdiffusion toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out, file_a, file_b;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  bool stochastic_msd = false;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", overrides, "dotted-path overrides key=value");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "RNG seed override");

  auto* fit = app.add_subcommand("fit", "fit the exponential-sum approximation");
  auto* simulate = app.add_subcommand("simulate", "integrate the system");
  auto* analytic = app.add_subcommand("analytic", "closed-form reference fields");
  auto* msd = app.add_subcommand("msd", "mean squared displacement + regression");
  msd->add_flag("--stochastic", stochastic_msd, "particle MCTRW instead of fields");
  auto* ssa = app.add_subcommand("ssa", "stochastic ensemble on a voxel lattice");
  auto* steady = app.add_subcommand("steady", "operator analysis report");
  auto* compare = app.add_subcommand("compare", "relative L2 between two CSVs");
  compare->add_option("--a", file_a, "first CSV")->required();
  compare->add_option("--b", file_b, "reference CSV")->required();
  for (auto* sc : {fit, simulate, analytic, msd, ssa, steady, compare})
    sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    json c = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ValidationError("cannot read config " + config_path);
      c = json::parse(f);
    }
    for (const auto& kv : overrides) apply_override(c, kv);
    if (seed >= 0) c["seed"] = (std::uint64_t)seed;
    validate_config(c);

    if (fit->parsed()) return cmd_fit(c, out);
    if (simulate->parsed()) return cmd_simulate(c, out);
    if (analytic->parsed()) return cmd_analytic(c, out);
    if (msd->parsed()) return cmd_msd(c, out, stochastic_msd);
    if (ssa->parsed()) return cmd_ssa(c, out);
    if (steady->parsed()) return cmd_steady(c, out);
    if (compare->parsed()) return cmd_compare(c, out, file_a, file_b);
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
