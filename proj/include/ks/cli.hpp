#pragma once
// Command-line front end: flat key=value configuration, four commands
// (dispersion, simulate, experiment, sweep) and CSV output with a
// '#'-prefixed constants header. Floats are printed with 17 significant
// digits so every emitted number round-trips exactly.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 blow-up,
// 4 internal numerical contradiction.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ks/dispersion.hpp"
#include "ks/experiment.hpp"
#include "ks/model.hpp"
#include "ks/propagator.hpp"
#include "ks/random.hpp"
#include "ks/solver.hpp"

namespace ks {

struct RunConfig {
  ModelParams params{1.0, 1.0, 1.0, 1.0, 1.0, 3.0, 2};

  // solver
  int N = 16;
  int M = 0;            // 0: derived from N and the dealias rule
  double dt = 0.0;      // 0: min(1e-3, 0.5/|lambda_max|)
  double t_end = 0.0;   // simulate: final time; experiment: budget (0 = none)
  std::string dealias = "two-thirds";
  std::string integrator = "imex-rk2";
  int sample_every = 10;

  // experiment
  double delta = 1e-3;
  std::optional<double> theta_override;
  std::optional<double> C0;      // override; default 2 x empirical probe
  std::optional<double> delta0;  // largest admissible delta
  std::string w0 = "dominant";
  int samples = 64;
  int trials = 200;        // growth-constant probe fields
  int probe_samples = 200; // embedding-constant probe fields
  std::vector<double> deltas;  // sweep amplitudes

  // io
  std::string out;
  std::uint64_t seed = 12345;
};

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// configuration parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("bad numeric value for key '" + key + "': " + value);
  return x;
}

inline long long parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long x = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("bad integer value for key '" + key + "': " + value);
  return x;
}

inline std::vector<double> parse_double_list(const std::string& key,
                                             const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace detail

inline void apply_key(RunConfig& rc, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  if (key == "mu") rc.params.mu = parse_double(key, value);
  else if (key == "chi") rc.params.chi = parse_double(key, value);
  else if (key == "D") rc.params.D = parse_double(key, value);
  else if (key == "f") rc.params.f = parse_double(key, value);
  else if (key == "k") rc.params.k = parse_double(key, value);
  else if (key == "U_bar") rc.params.U_bar = parse_double(key, value);
  else if (key == "d") rc.params.d = static_cast<int>(parse_int(key, value));
  else if (key == "N") rc.N = static_cast<int>(parse_int(key, value));
  else if (key == "M") rc.M = static_cast<int>(parse_int(key, value));
  else if (key == "dt") rc.dt = parse_double(key, value);
  else if (key == "t_end") rc.t_end = parse_double(key, value);
  else if (key == "dealias") rc.dealias = value;
  else if (key == "integrator") rc.integrator = value;
  else if (key == "sample_every") rc.sample_every = static_cast<int>(parse_int(key, value));
  else if (key == "delta") rc.delta = parse_double(key, value);
  else if (key == "theta_override") rc.theta_override = parse_double(key, value);
  else if (key == "C0") rc.C0 = parse_double(key, value);
  else if (key == "delta0") rc.delta0 = parse_double(key, value);
  else if (key == "w0") rc.w0 = value;
  else if (key == "samples") rc.samples = static_cast<int>(parse_int(key, value));
  else if (key == "trials") rc.trials = static_cast<int>(parse_int(key, value));
  else if (key == "probe_samples") rc.probe_samples = static_cast<int>(parse_int(key, value));
  else if (key == "deltas") rc.deltas = detail::parse_double_list(key, value);
  else if (key == "out") rc.out = value;
  else if (key == "seed") rc.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else throw ConfigError("unknown config key: " + key);
}

inline void load_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_key(rc, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
}

// ---------------------------------------------------------------------------
// derived pieces
// ---------------------------------------------------------------------------

inline SolverConfig solver_config(const RunConfig& rc, const SpectrumSummary* spec) {
  SolverConfig cfg;
  cfg.N = rc.N;
  cfg.M = rc.M;
  cfg.t_end = rc.t_end;
  cfg.dealias = rc.dealias;
  cfg.integrator = rc.integrator;
  if (rc.dt > 0.0) {
    cfg.dt = rc.dt;
  } else {
    cfg.dt = 1e-3;
    if (spec && spec->lambda_max != 0.0)
      cfg.dt = std::min(1e-3, 0.5 / std::fabs(spec->lambda_max));
  }
  return cfg;
}

/// Initial shape from the w0 descriptor: "dominant", "random", or an
/// explicit list "coeffs:u@1,0=0.5;v@1,0=1". The experiment normalizes it.
inline SpectralField make_initial_shape(const RunConfig& rc, const SpectrumSummary& spec) {
  const std::string& s = rc.w0;
  if (s == "dominant" || s == "dominant-mode") {
    const ModeIndex q0 = spec.omega_max.front();
    const EigenPair& e = spec.pair(q0);
    SpectralField f(rc.params.d, rc.N);
    f.u[f.flat(q0)] = e.r_plus.u;
    f.v[f.flat(q0)] = e.r_plus.v;
    return f;
  }
  if (s == "random") {
    Rng rng(rc.seed);
    return random_unit_field(rc.params.d, rc.N, rng);
  }
  if (s.rfind("coeffs:", 0) == 0) {
    SpectralField f(rc.params.d, rc.N);
    std::stringstream ss(s.substr(7));
    std::string entry;
    bool any = false;
    while (std::getline(ss, entry, ';')) {
      entry = detail::trim(entry);
      if (entry.empty()) continue;
      const size_t at = entry.find('@');
      const size_t eq = entry.find('=');
      if (at == std::string::npos || eq == std::string::npos || eq < at)
        throw ConfigError("w0 coeffs entry must look like u@1,0=0.5: " + entry);
      const std::string comp = detail::trim(entry.substr(0, at));
      const std::string idx = entry.substr(at + 1, eq - at - 1);
      const double val = detail::parse_double("w0", detail::trim(entry.substr(eq + 1)));
      std::stringstream is(idx);
      std::string part;
      ModeIndex m;
      m.d = rc.params.d;
      int got = 0;
      while (std::getline(is, part, ',')) {
        if (got >= rc.params.d) throw ConfigError("w0 mode has too many components: " + entry);
        m.q[got++] = static_cast<int>(detail::parse_int("w0", detail::trim(part)));
      }
      if (got != rc.params.d) throw ConfigError("w0 mode needs d components: " + entry);
      for (int i = 0; i < m.d; ++i)
        if (m.q[i] < 0 || m.q[i] > rc.N) throw ConfigError("w0 mode out of range: " + entry);
      if (comp == "u") f.u[f.flat(m)] = val;
      else if (comp == "v") f.v[f.flat(m)] = val;
      else throw ConfigError("w0 component must be u or v: " + entry);
      any = true;
    }
    if (!any) throw ConfigError("w0 coeffs list is empty");
    return f;
  }
  throw ConfigError("w0 must be one of: dominant | random | coeffs:<list>");
}

// ---------------------------------------------------------------------------
// writers
// ---------------------------------------------------------------------------

namespace detail {

inline void write_params_header(std::ofstream& out, const RunConfig& rc) {
  out << "# mu = " << fmt17(rc.params.mu) << "\n";
  out << "# chi = " << fmt17(rc.params.chi) << "\n";
  out << "# D = " << fmt17(rc.params.D) << "\n";
  out << "# f = " << fmt17(rc.params.f) << "\n";
  out << "# k = " << fmt17(rc.params.k) << "\n";
  out << "# U_bar = " << fmt17(rc.params.U_bar) << "\n";
  out << "# d = " << rc.params.d << "\n";
  out << "# N = " << rc.N << "\n";
  out << "# seed = " << rc.seed << "\n";
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

inline void write_experiment_rows(std::ofstream& out, const ExperimentReport& rep,
                                  const std::string& prefix) {
  for (size_t i = 0; i < rep.times.size(); ++i) {
    out << prefix << fmt17(rep.times[i]) << ',' << fmt17(rep.l2_series[i]) << ','
        << fmt17(rep.h2_series[i]) << ',' << fmt17(rep.mass_series[i]) << ','
        << fmt17(rep.gap_ratio[i]) << ',' << fmt17(rep.linear_gap[i]) << ','
        << fmt17(rep.duhamel[i]) << ',' << fmt17(rep.energy_E2[i]) << ','
        << to_string(rep.status) << "\n";
  }
}

inline void write_constants_header(std::ofstream& out, const ExperimentReport& rep,
                                   double theta_formula, double c1_raw, double C0) {
  out << "# delta = " << fmt17(rep.delta) << "\n";
  out << "# theta = " << fmt17(rep.theta) << "\n";
  out << "# theta_formula = " << fmt17(theta_formula) << "\n";
  out << "# T_delta = " << fmt17(rep.T_delta) << "\n";
  out << "# lambda_max = " << fmt17(rep.consts.lambda_max) << "\n";
  out << "# nu = " << fmt17(rep.consts.nu) << "\n";
  out << "# nu_convention = gap to all remaining eigenvalues, minus branches included\n";
  out << "# A = " << fmt17(rep.consts.A) << "\n";
  out << "# C2 = " << fmt17(rep.consts.C2) << "\n";
  out << "# C3 = " << fmt17(rep.consts.C3) << "\n";
  out << "# C1_raw = " << fmt17(c1_raw) << "\n";
  out << "# C1_used = " << fmt17(rep.consts.C1_hat) << "\n";
  out << "# C0 = " << fmt17(C0) << "\n";
  out << "# w0_h2 = " << fmt17(rep.w0_h2) << "\n";
  out << "# fitted_C = " << fmt17(rep.fitted_C) << "\n";
  out << "# t_star = " << fmt17(rep.t_star) << "\n";
  out << "# t_star_star = " << fmt17(rep.t_star_star) << "\n";
  out << "# energy_fraction_ok = " << fmt17(rep.energy_fraction_ok) << "\n";
  out << "# status = " << to_string(rep.status) << "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

inline int cmd_dispersion(const RunConfig& rc) {
  const ModelParams p = validate(rc.params);
  const SpectrumSummary spec = spectrum_summary(p, rc.N);
  const auto q2c = critical_wavenumber_squared(p);

  std::ofstream out = detail::open_output(rc.out.empty() ? "dispersion.csv" : rc.out);
  out << "# command = dispersion\n";
  detail::write_params_header(out, rc);
  out << "# lambda_max = " << fmt17(spec.lambda_max) << "\n";
  out << "# nu = " << fmt17(spec.nu) << "\n";
  out << "# nu_convention = gap to all remaining eigenvalues, minus branches included\n";
  out << "# unstable_count = " << spec.unstable.size() << "\n";
  out << "# omega_max_count = " << spec.omega_max.size() << "\n";
  out << "# q_c_squared = " << (q2c ? fmt17(*q2c) : std::string("none")) << "\n";
  for (int i = 0; i < rc.params.d; ++i) out << 'q' << (i + 1) << ',';
  out << "q_squared,lambda_minus,lambda_plus,r_plus_u\n";
  for (const EigenPair& e : spec.pairs) {
    for (int i = 0; i < rc.params.d; ++i) out << e.q.q[i] << ',';
    out << e.q.q_squared() << ',' << fmt17(e.lambda_minus) << ','
        << fmt17(e.lambda_plus) << ',' << fmt17(e.r_plus.u) << "\n";
  }
  return 0;
}

inline int cmd_simulate(const RunConfig& rc) {
  const ModelParams p = validate(rc.params);
  if (!(rc.t_end > 0.0)) throw ConfigError("t_end must be > 0 for simulate");
  const SpectrumSummary spec = spectrum_summary(p, rc.N);
  const SolverConfig cfg = solver_config(rc, &spec);
  validate_config(cfg);

  SpectralField w0 = make_initial_shape(rc, spec);
  const double n0 = l2_norm(w0);
  if (!(n0 > 0.0)) throw ConfigError("initial state is zero");
  w0 *= rc.delta / n0;

  const Trajectory tr = simulate(w0, p, cfg, rc.sample_every);

  std::ofstream out = detail::open_output(rc.out.empty() ? "trajectory.csv" : rc.out);
  out << "# command = simulate\n";
  detail::write_params_header(out, rc);
  out << "# M = " << effective_grid(cfg) << "\n";
  out << "# dt = " << fmt17(cfg.dt) << "\n";
  out << "# t_end = " << fmt17(cfg.t_end) << "\n";
  out << "# delta = " << fmt17(rc.delta) << "\n";
  out << "# status = "
      << (tr.status == TrajectoryStatus::completed ? "completed" : "blow-up") << "\n";
  out << "t,l2,h2,mass\n";
  for (size_t i = 0; i < tr.times.size(); ++i) {
    out << fmt17(tr.times[i]) << ',' << fmt17(l2_norm(tr.states[i])) << ','
        << fmt17(h2_norm(tr.states[i])) << ',' << fmt17(tr.masses[i]) << "\n";
  }
  return tr.status == TrajectoryStatus::blow_up ? 3 : 0;
}

namespace detail {

struct ExperimentPieces {
  SpectrumSummary spec;
  TrackingConstants tc;
  double theta_formula = 0.0;
  double c1_raw = 0.0;
  double C0 = 0.0;
  SolverConfig cfg;
};

inline ExperimentPieces prepare_experiment(const RunConfig& rc) {
  ExperimentPieces ep;
  const ModelParams p = validate(rc.params);
  ep.spec = spectrum_summary(p, rc.N);
  ep.cfg = solver_config(rc, &ep.spec);
  validate_config(ep.cfg);
  ep.c1_raw = growth_constant_estimate(p, rc.N, rc.trials, rc.seed + 2);
  ep.C0 = rc.C0 ? *rc.C0
                : 2.0 * sobolev_constant_probe(p.d, rc.N, rc.probe_samples, rc.seed + 1);
  ep.tc = constants(p, ep.spec, ep.C0, 2.0 * ep.c1_raw);
  ep.theta_formula = ep.tc.theta;
  if (rc.theta_override) ep.tc.theta = *rc.theta_override;
  return ep;
}

}  // namespace detail

inline int cmd_experiment(const RunConfig& rc) {
  detail::ExperimentPieces ep = detail::prepare_experiment(rc);
  if (rc.delta0 && rc.delta > *rc.delta0)
    throw BadAmplitude("delta exceeds configured delta0");
  const SpectralField w0 = make_initial_shape(rc, ep.spec);
  const ExperimentReport rep =
      run(rc.delta, w0, rc.params, ep.spec, ep.cfg, ep.tc, rc.samples);

  std::ofstream out = detail::open_output(rc.out.empty() ? "experiment.csv" : rc.out);
  out << "# command = experiment\n";
  detail::write_params_header(out, rc);
  out << "# M = " << effective_grid(ep.cfg) << "\n";
  out << "# dt = " << fmt17(ep.cfg.dt) << "\n";
  detail::write_constants_header(out, rep, ep.theta_formula, ep.c1_raw, ep.C0);
  out << "t,l2,h2,mass,gap_ratio,linear_gap,duhamel_residual,energy_E2,status\n";
  detail::write_experiment_rows(out, rep, "");
  return rep.status == RunStatus::blow_up ? 3 : 0;
}

inline int cmd_sweep(const RunConfig& rc, const std::vector<double>& deltas) {
  if (deltas.empty()) throw ConfigError("sweep needs a non-empty delta list");
  detail::ExperimentPieces ep = detail::prepare_experiment(rc);

  struct Entry {
    double delta;
    std::optional<ExperimentReport> report;
    std::string error;
  };
  std::vector<Entry> entries;
  for (double d : deltas) {
    Entry e;
    e.delta = d;
    try {
      if (rc.delta0 && d > *rc.delta0) throw BadAmplitude("delta exceeds configured delta0");
      const SpectralField w0 = make_initial_shape(rc, ep.spec);
      e.report = run(d, w0, rc.params, ep.spec, ep.cfg, ep.tc, rc.samples);
    } catch (const Error& err) {
      e.error = err.what();
    }
    entries.push_back(std::move(e));
  }

  std::ofstream out = detail::open_output(rc.out.empty() ? "sweep.csv" : rc.out);
  out << "# command = sweep\n";
  detail::write_params_header(out, rc);
  out << "# M = " << effective_grid(ep.cfg) << "\n";
  out << "# dt = " << fmt17(ep.cfg.dt) << "\n";
  out << "# theta = " << fmt17(ep.tc.theta) << "\n";
  out << "# theta_formula = " << fmt17(ep.theta_formula) << "\n";
  out << "# C1_raw = " << fmt17(ep.c1_raw) << "\n";
  out << "# C0 = " << fmt17(ep.C0) << "\n";
  for (const Entry& e : entries) {
    out << "# delta " << fmt17(e.delta) << ": ";
    if (e.report)
      out << to_string(e.report->status) << ", fitted_C = " << fmt17(e.report->fitted_C)
          << ", T_delta = " << fmt17(e.report->T_delta) << "\n";
    else
      out << "error: " << e.error << "\n";
  }
  out << "delta,t,l2,h2,mass,gap_ratio,linear_gap,duhamel_residual,energy_E2,status\n";
  bool any_ok = false, any_blowup = false;
  for (const Entry& e : entries) {
    if (!e.report) {
      out << fmt17(e.delta) << ",,,,,,,,error\n";
      continue;
    }
    detail::write_experiment_rows(out, *e.report, fmt17(e.delta) + ",");
    if (e.report->status == RunStatus::blow_up) any_blowup = true;
    else any_ok = true;
  }
  if (any_ok) return 0;
  return any_blowup ? 3 : 2;
}

/// Run a command, mapping exceptions to the documented exit codes.
inline int dispatch(const std::string& command, const RunConfig& rc) {
  try {
    if (command == "dispersion") return cmd_dispersion(rc);
    if (command == "simulate") return cmd_simulate(rc);
    if (command == "experiment") return cmd_experiment(rc);
    if (command == "sweep") return cmd_sweep(rc, rc.deltas);
    std::cerr << "unknown command: " << command << "\n";
    return 2;
  } catch (const NumericalContradiction& e) {
    std::cerr << "numerical contradiction: " << e.what() << "\n";
    return 4;
  } catch (const Overflow& e) {
    std::cerr << "overflow: " << e.what() << "\n";
    return 4;
  } catch (const NonFinite& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace ks
