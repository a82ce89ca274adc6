#pragma once
// The escape-time experiment. A delta-amplitude perturbation of the unstable
// homogeneous state is evolved nonlinearly up to
//
//   T_delta = ln(theta/delta) / lambda_max,
//
// the time at which the linearly extrapolated amplitude reaches the fixed
// threshold theta, and compared against the dominant-mode linear solution.
// The central observable is the gap ratio
//
//   g(t) = || w(t) - dominant_projection(delta w0, t) || / (delta e^{lambda_max t}),
//
// whose bound g(t) <= C (e^{-nu t} + delta ||w0||_H2^2 + delta e^{lambda_max t})
// is checked with a fitted C. Auxiliary diagnostics: the Duhamel identity
// residual and the second-order weighted energy inequality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ks/dispersion.hpp"
#include "ks/model.hpp"
#include "ks/propagator.hpp"
#include "ks/random.hpp"
#include "ks/solver.hpp"
#include "ks/spectral.hpp"

namespace ks {

/// Constants entering the tracking bound and the bootstrap diagnostics.
struct TrackingConstants {
  double A = 0.0;           ///< energy weight (U_bar chi)^2 / (D mu)
  double C2 = 0.0;          ///< energy forcing constant
  double C1_hat = 1.0;      ///< growth constant used by the experiment
  double C3 = 1.0;          ///< bootstrap constant
  double theta = 0.0;       ///< escape amplitude
  double nu = 0.0;          ///< spectral gap
  double lambda_max = 0.0;  ///< maximal growth rate
  double C0 = 1.0;          ///< embedding constant
};

/// Fill the constants from closed forms:
///   A  = (U_bar chi)^2 / (D mu)
///   C2 = U_bar^6 chi^6 f^6 / (2 D^3 mu^5 k^3)
///   C3 = C1_hat^2 max(A, 1/A) max(4 C2 / lambda_max, 1)
///   theta = 1/2 min(lambda_max/4, mu/8, (U_bar chi)^2/(4 mu)) / (C0 C3),
/// the factor 1/2 keeping the smallness condition on theta strict.
inline TrackingConstants constants(const ModelParams& p, const SpectrumSummary& s,
                                   double C0, double C1_hat) {
  if (!(s.lambda_max > 0.0))
    throw StableRegime("no growing mode: lambda_max = " + std::to_string(s.lambda_max));
  TrackingConstants c;
  c.lambda_max = s.lambda_max;
  c.nu = s.nu;
  c.C0 = C0;
  c.C1_hat = C1_hat;
  const double uc = p.U_bar * p.chi;
  c.A = uc * uc / (p.D * p.mu);
  c.C2 = std::pow(p.U_bar * p.chi * p.f, 6) /
         (2.0 * std::pow(p.D, 3) * std::pow(p.mu, 5) * std::pow(p.k, 3));
  c.C3 = C1_hat * C1_hat * std::max(c.A, 1.0 / c.A) *
         std::max(4.0 * c.C2 / c.lambda_max, 1.0);
  const double cap = std::min({c.lambda_max / 4.0, p.mu / 8.0, uc * uc / (4.0 * p.mu)});
  c.theta = 0.5 * cap / (C0 * c.C3);
  return c;
}

/// T_delta with delta e^{lambda_max T_delta} = theta.
inline double escape_time(double delta, double theta, double lambda_max) {
  if (!(lambda_max > 0.0))
    throw StableRegime("escape_time needs lambda_max > 0");
  if (!(delta > 0.0) || !(theta > 0.0) || delta >= theta)
    throw BadAmplitude("need 0 < delta < theta, got delta=" + std::to_string(delta) +
                       ", theta=" + std::to_string(theta));
  return std::log(theta / delta) / lambda_max;
}

// ---------------------------------------------------------------------------
// Sobolev probe
// ---------------------------------------------------------------------------

namespace detail {

/// Point values on the endpoint grid x_j = j pi / K, j = 0..K per axis.
/// Boundary nodes are included since cosine extrema sit there.
inline std::vector<double> endpoint_samples(const std::vector<double>& coeffs, int d,
                                            int N, int K) {
  const int n = N + 1;
  std::vector<double> table(static_cast<size_t>(K + 1) * n);
  for (int j = 0; j <= K; ++j)
    for (int m = 0; m < n; ++m)
      table[static_cast<size_t>(j) * n + m] = std::cos(m * (kPi * j / K));
  std::vector<double> cur = coeffs;
  std::array<int, 3> ext = extents(d, n);
  for (int a = 0; a < d; ++a) {
    const int n_in = ext[a];
    int stride = 1;
    for (int b = 0; b < a; ++b) stride *= ext[b];
    int hi = 1;
    for (int b = a + 1; b < 3; ++b) hi *= ext[b];
    std::vector<double> next(static_cast<size_t>(stride) * (K + 1) * hi, 0.0);
    for (int h = 0; h < hi; ++h)
      for (int o = 0; o <= K; ++o)
        for (int m = 0; m < n_in; ++m) {
          const double w = table[static_cast<size_t>(o) * n + m];
          const double* irow = cur.data() + (static_cast<size_t>(h) * n_in + m) * stride;
          double* orow = next.data() + (static_cast<size_t>(h) * (K + 1) + o) * stride;
          for (int l = 0; l < stride; ++l) orow[l] += w * irow[l];
        }
    cur = std::move(next);
    ext[a] = K + 1;
  }
  return cur;
}

}  // namespace detail

/// max |g| over a fine sampling grid (boundary included) divided by the modal
/// H2 norm. g is the u-component of the field; the v-component is ignored.
inline double sup_over_h2_ratio(const SpectralField& g) {
  const int K = std::max(4 * (g.N + 1), 32);
  const std::vector<double> samples = detail::endpoint_samples(g.u, g.d, g.N, K);
  double sup = 0.0;
  for (double x : samples) sup = std::max(sup, std::fabs(x));
  SpectralField scalar(g.d, g.N);
  scalar.u = g.u;
  const double h2 = h2_norm(scalar);
  return h2 > 0.0 ? sup / h2 : 0.0;
}

/// ||g||_L4 / ||grad g|| for the mean-zero part of the u-component.
inline double l4_over_grad_ratio(const SpectralField& g) {
  SpectralField g0(g.d, g.N);
  g0.u = g.u;
  g0.u[0] = 0.0;  // mean-zero
  double grad2 = 0.0;
  for (int i = 0; i < g0.size(); ++i) {
    const ModeIndex m = g0.mode(i);
    grad2 += m.q_squared() * gamma_weight(m) * g0.u[i] * g0.u[i];
  }
  if (!(grad2 > 0.0)) return 0.0;
  const int M = std::max(4 * (g.N + 1), 32);  // exact for the degree-4N integrand
  const CosinePlan plan(g.d, g.N, M);
  const std::vector<double> samples = plan.to_grid(g0.u);
  double s4 = 0.0;
  for (double x : samples) s4 += x * x * x * x;
  double w = kPi / M;
  double cell = w;
  for (int i = 1; i < g.d; ++i) cell *= w;
  return std::pow(s4 * cell, 0.25) / std::sqrt(grad2);
}

/// Empirical embedding constant: running maximum of the two ratios over the
/// constant witness, a single-mode witness and `samples` random band-limited
/// scalar fields. Nondecreasing in `samples` for a fixed seed.
inline double sobolev_constant_probe(int d, int N, int samples,
                                     std::uint64_t seed = 0x5eedc0de) {
  SpectralField one(d, N);
  one.u[0] = 1.0;
  double best = sup_over_h2_ratio(one);
  if (N >= 1) {
    SpectralField c1(d, N);
    ModeIndex m;
    m.d = d;
    m.q[0] = 1;
    c1.u[c1.flat(m)] = 1.0;
    best = std::max(best, sup_over_h2_ratio(c1));
    best = std::max(best, l4_over_grad_ratio(c1));
  }
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    SpectralField g(d, N);
    for (int i = 0; i < g.size(); ++i) g.u[i] = rng.normal();
    best = std::max(best, sup_over_h2_ratio(g));
    best = std::max(best, l4_over_grad_ratio(g));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Duhamel residual
// ---------------------------------------------------------------------------

struct DuhamelSeries {
  std::vector<double> times;
  std::vector<double> residuals;
};

/// || w(t) - e^{Lt} w(0) - int_0^t e^{L(t-tau)} N(w(tau)) dtau || at the
/// quadrature nodes, with N = -chi div(u grad v) and the integral by
/// composite trapezoid over trajectory samples spaced ~quad_dt apart
/// (samples are strided down when the trajectory is denser than quad_dt).
inline DuhamelSeries duhamel_residual(const Trajectory& tr, const ModelParams& p,
                                      const SpectrumSummary& spec,
                                      const SolverConfig& cfg, double quad_dt) {
  const size_t n = tr.times.size();
  if (n == 0) throw InsufficientSamples("empty trajectory");
  DuhamelSeries out;
  if (n == 1) {
    out.times = tr.times;
    out.residuals.assign(1, 0.0);
    return out;
  }
  double max_gap = 0.0;
  for (size_t i = 0; i + 1 < n; ++i)
    max_gap = std::max(max_gap, tr.times[i + 1] - tr.times[i]);
  if (max_gap > quad_dt * (1.0 + 1e-9))
    throw InsufficientSamples("trajectory spacing " + std::to_string(max_gap) +
                              " exceeds quad_dt " + std::to_string(quad_dt));
  const int stride = std::max(1, static_cast<int>(std::llround(quad_dt / max_gap)));

  std::vector<size_t> nodes;
  for (size_t i = 0; i < n; i += stride) nodes.push_back(i);
  if (nodes.back() != n - 1) nodes.push_back(n - 1);

  const SpectralField& w0 = tr.states[0];
  auto eval_nl = [&](const SpectralField& w) {
    return cfg.nonlinearity ? nonlinear_term(w, p, cfg) : SpectralField(w.d, w.N);
  };

  SpectralField integral(w0.d, w0.N);
  SpectralField nl_prev = eval_nl(tr.states[nodes[0]]);
  out.times.push_back(tr.times[nodes[0]]);
  out.residuals.push_back(l2_norm(tr.states[nodes[0]] - propagate(w0, tr.times[nodes[0]], spec) - integral));

  for (size_t j = 1; j < nodes.size(); ++j) {
    const size_t idx = nodes[j];
    const double h = tr.times[idx] - tr.times[nodes[j - 1]];
    SpectralField nl_cur = eval_nl(tr.states[idx]);
    // shift the accumulated integral and add the trapezoid panel
    integral = propagate(integral, h, spec);
    SpectralField shifted = propagate(nl_prev, h, spec);
    axpy(integral, 0.5 * h, shifted);
    axpy(integral, 0.5 * h, nl_cur);
    out.times.push_back(tr.times[idx]);
    out.residuals.push_back(
        l2_norm(tr.states[idx] - propagate(w0, tr.times[idx], spec) - integral));
    nl_prev = std::move(nl_cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Second-order energy diagnostic
// ---------------------------------------------------------------------------

struct EnergyDiagnostic {
  std::vector<double> E2;        ///< sum_{|a|=2} int |d^a u|^2 + A |d^a v|^2
  std::vector<double> rhs;       ///< C2 ||u||^2
  std::vector<double> dE2_half;  ///< centered (1/2) dE2/dt; NaN at the ends
  std::vector<char> hypothesis;  ///< H2 smallness at the sample
  std::vector<char> applicable;  ///< interior and hypothesis holds across the stencil
  std::vector<char> inequality;  ///< dE2_half <= 1.05 rhs where applicable
  double fraction_ok = 1.0;      ///< satisfied fraction among applicable points
};

namespace detail {

/// sum over second-order multi-indices of int |d^a e_q|^2 for one mode.
inline double second_derivative_weight(const ModeIndex& m) {
  auto factor = [](int a, int q) -> double {
    const double qq = static_cast<double>(q) * q;
    switch (a) {
      case 0: return q == 0 ? kPi : 0.5 * kPi;
      case 1: return qq * 0.5 * kPi;        // zero automatically at q = 0
      default: return qq * qq * 0.5 * kPi;  // q^4; zero automatically at q = 0
    }
  };
  double total = 0.0;
  const int d = m.d;
  for (int a0 = 0; a0 <= 2; ++a0)
    for (int a1 = 0; a1 <= (d > 1 ? 2 : 0); ++a1)
      for (int a2 = 0; a2 <= (d > 2 ? 2 : 0); ++a2) {
        if (a0 + a1 + a2 != 2) continue;
        double w = factor(a0, m.q[0]);
        if (d > 1) w *= factor(a1, m.q[1]);
        if (d > 2) w *= factor(a2, m.q[2]);
        total += w;
      }
  return total;
}

}  // namespace detail

/// E2(t) along the trajectory and the discrete check that (1/2) dE2/dt stays
/// below C2 ||u||^2 (5% slack) wherever the H2 smallness hypothesis
/// ||w||_H2 <= min(mu/4, (U_bar chi)^2/(2 mu)) / C0 holds across the stencil.
inline EnergyDiagnostic energy_diagnostic(const Trajectory& tr, const ModelParams& p,
                                          const TrackingConstants& tc) {
  const size_t n = tr.times.size();
  EnergyDiagnostic diag;
  diag.E2.resize(n);
  diag.rhs.resize(n);
  diag.dE2_half.assign(n, std::numeric_limits<double>::quiet_NaN());
  diag.hypothesis.assign(n, 0);
  diag.applicable.assign(n, 0);
  diag.inequality.assign(n, 0);
  if (n == 0) return diag;

  const double uc = p.U_bar * p.chi;
  const double small = std::min(p.mu / 4.0, uc * uc / (2.0 * p.mu)) / tc.C0;

  const SpectralField& first = tr.states[0];
  std::vector<double> w2(first.size()), gam(first.size());
  for (int i = 0; i < first.size(); ++i) {
    const ModeIndex m = first.mode(i);
    w2[i] = detail::second_derivative_weight(m);
    gam[i] = gamma_weight(m);
  }

  for (size_t s = 0; s < n; ++s) {
    const SpectralField& w = tr.states[s];
    double e2 = 0.0, un2 = 0.0;
    for (int i = 0; i < w.size(); ++i) {
      e2 += w2[i] * (w.u[i] * w.u[i] + tc.A * w.v[i] * w.v[i]);
      un2 += gam[i] * w.u[i] * w.u[i];
    }
    diag.E2[s] = e2;
    diag.rhs[s] = tc.C2 * un2;
    diag.hypothesis[s] = h2_norm(w) <= small ? 1 : 0;
  }

  size_t applicable = 0, ok = 0;
  for (size_t s = 1; s + 1 < n; ++s) {
    diag.dE2_half[s] =
        0.5 * (diag.E2[s + 1] - diag.E2[s - 1]) / (tr.times[s + 1] - tr.times[s - 1]);
    if (diag.hypothesis[s - 1] && diag.hypothesis[s] && diag.hypothesis[s + 1]) {
      diag.applicable[s] = 1;
      ++applicable;
      if (diag.dE2_half[s] <= 1.05 * diag.rhs[s]) {
        diag.inequality[s] = 1;
        ++ok;
      }
    }
  }
  diag.fraction_ok = applicable ? static_cast<double>(ok) / applicable : 1.0;
  return diag;
}

// ---------------------------------------------------------------------------
// The experiment proper
// ---------------------------------------------------------------------------

enum class RunStatus { completed, blow_up, budget_exceeded };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blow_up: return "blow-up";
    default: return "budget-exceeded";
  }
}

struct ExperimentReport {
  double delta = 0.0;
  double T_delta = 0.0;
  double theta = 0.0;
  double w0_h2 = 0.0;        ///< H2 norm of the unit-L2 initial shape
  double fitted_C = 0.0;     ///< max_t gap_ratio / bound bracket
  double t_star = -1.0;      ///< first time the linear gap exceeds C1_hat/2; -1 = never
  double t_star_star = -1.0; ///< first time H2 smallness fails; -1 = never
  TrackingConstants consts;
  RunStatus status = RunStatus::completed;

  std::vector<double> times;
  std::vector<double> l2_series, h2_series, mass_series;
  std::vector<double> gap_ratio;   ///< vs dominant-mode projection
  std::vector<double> linear_gap;  ///< vs full linear flow
  std::vector<double> duhamel;
  std::vector<double> energy_E2;
  double energy_fraction_ok = 1.0;
  Trajectory trajectory;
};

/// Evolve delta * (w0 normalized to unit L2) to min(T_delta, budget) and fill
/// the report. cfg.t_end > 0 acts as the time budget; 0 means none. Sampling:
/// `samples` evenly spaced interior times plus t = 0 and the final time
/// exactly. A blow-up yields a partial report with status blow_up.
inline ExperimentReport run(double delta, const SpectralField& w0_in,
                            const ModelParams& p, const SpectrumSummary& spec,
                            const SolverConfig& cfg, const TrackingConstants& tc,
                            int samples = 64) {
  validate(p);
  validate_config(cfg);
  if (samples < 0) throw ConfigError("samples must be >= 0");
  const double norm0 = l2_norm(w0_in);
  if (!(norm0 > 0.0)) throw BadAmplitude("initial shape w0 is zero");
  SpectralField w0 = w0_in;
  w0 *= 1.0 / norm0;

  ExperimentReport rep;
  rep.delta = delta;
  rep.consts = tc;
  rep.theta = tc.theta;
  rep.w0_h2 = h2_norm(w0);
  rep.T_delta = escape_time(delta, tc.theta, tc.lambda_max);

  const double budget = cfg.t_end > 0.0 ? cfg.t_end : rep.T_delta;
  const double t_run = std::min(rep.T_delta, budget);
  rep.status = budget < rep.T_delta ? RunStatus::budget_exceeded : RunStatus::completed;

  std::vector<double> plan_times;
  const double eps = 1e-12 * std::max(1.0, rep.T_delta);
  for (int k = 0; k <= samples + 1; ++k) {
    const double t = rep.T_delta * k / (samples + 1);
    if (t <= t_run + eps) plan_times.push_back(std::min(t, t_run));
  }
  if (plan_times.empty() || plan_times.back() < t_run - eps) plan_times.push_back(t_run);

  SpectralField initial = w0;
  initial *= delta;

  ImexStepper st(p, cfg);
  SpectralField state = initial;

  auto record = [&](double t, const SpectralField& w) {
    rep.times.push_back(t);
    rep.l2_series.push_back(l2_norm(w));
    rep.h2_series.push_back(h2_norm(w));
    rep.mass_series.push_back(mass(w));
    const double growth = delta * std::exp(tc.lambda_max * t);
    rep.gap_ratio.push_back(l2_norm(w - dominant_projection(initial, t, spec)) / growth);
    rep.linear_gap.push_back(l2_norm(w - propagate(initial, t, spec)) / growth);
    rep.trajectory.times.push_back(t);
    rep.trajectory.states.push_back(w);
    rep.trajectory.masses.push_back(mass(w));
  };

  record(0.0, state);
  for (size_t k = 1; k < plan_times.size(); ++k) {
    const double seg = plan_times[k] - plan_times[k - 1];
    const long full = static_cast<long>(std::floor(seg / cfg.dt + 1e-9));
    const double rem = seg - full * cfg.dt;
    bool blew_up = false;
    try {
      for (long i = 0; i < full; ++i) state = st.step(state, cfg.dt);
      if (rem > eps) state = st.step(state, rem);
    } catch (const NonFinite&) {
      blew_up = true;
    }
    if (blew_up) {
      rep.status = RunStatus::blow_up;
      rep.trajectory.status = TrajectoryStatus::blow_up;
      break;
    }
    record(plan_times[k], state);
  }

  // first-crossing observables
  const double uc = p.U_bar * p.chi;
  const double small = std::min(p.mu / 4.0, uc * uc / (2.0 * p.mu)) / tc.C0;
  for (size_t i = 0; i < rep.times.size(); ++i) {
    if (rep.t_star < 0.0 && rep.linear_gap[i] > 0.5 * tc.C1_hat) rep.t_star = rep.times[i];
    if (rep.t_star_star < 0.0 && rep.h2_series[i] > small) rep.t_star_star = rep.times[i];
  }

  // fitted tracking constant
  double fitted = 0.0;
  for (size_t i = 0; i < rep.times.size(); ++i) {
    const double t = rep.times[i];
    const double bracket = std::exp(-tc.nu * t) + delta * rep.w0_h2 * rep.w0_h2 +
                           delta * std::exp(tc.lambda_max * t);
    fitted = std::max(fitted, rep.gap_ratio[i] / bracket);
  }
  rep.fitted_C = fitted;

  if (rep.times.size() >= 2) {
    double spacing = 0.0;
    for (size_t i = 0; i + 1 < rep.times.size(); ++i)
      spacing = std::max(spacing, rep.times[i + 1] - rep.times[i]);
    rep.duhamel =
        duhamel_residual(rep.trajectory, p, spec, cfg, spacing * (1.0 + 1e-9)).residuals;
  } else {
    rep.duhamel.assign(rep.times.size(), 0.0);
  }

  const EnergyDiagnostic ed = energy_diagnostic(rep.trajectory, p, tc);
  rep.energy_E2 = ed.E2;
  rep.energy_fraction_ok = ed.fraction_ok;
  return rep;
}

}  // namespace ks
