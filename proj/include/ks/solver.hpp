#pragma once
// Pseudo-spectral IMEX integrator for the full perturbation system
//
//   u_t = mu lap u - chi U_bar lap v - chi div(u grad v),
//   v_t = D lap v + f u - k v.
//
// The coupled linear part is applied exactly per mode through the same
// eigen-exponentials as the propagator (integrating-factor form), so with the
// nonlinearity switched off a step reproduces propagate() to rounding. The
// nonlinear term is treated explicitly with a two-stage midpoint rule:
//
//   w* = E(h/2) (w + h/2 N(w)),   w1 = E(h) w + h E(h/2) N(w*).
//
// div(u grad v) is evaluated in divergence form: each product u * dv/dx_a is
// odd along axis a, is analyzed against the sine basis there, and is then
// differentiated back into the cosine space. The q = 0 coefficient of the
// result is zero by construction, so the mean of u is conserved to the bit.
//
// Aliasing: a product of two degree-N fields has degree 2N per axis; on an
// M-point midpoint grid mode n picks up contamination from 2M - n only, which
// stays above 2N for every retained n <= N as soon as 2M > 3N. That is the
// two-thirds rule in this basis and is what the M >= ceil(3(N+1)/2) floor
// guarantees.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ks/dispersion.hpp"
#include "ks/errors.hpp"
#include "ks/model.hpp"
#include "ks/spectral.hpp"

namespace ks {

struct SolverConfig {
  int N = 16;                         ///< spectral truncation per axis
  int M = 0;                          ///< collocation grid per axis; 0 = derived
  double dt = 1e-3;
  double t_end = 0.0;
  std::string dealias = "two-thirds";  ///< "two-thirds" or "none"
  std::string integrator = "imex-rk2";
  bool nonlinearity = true;           ///< test hook: drop the chi-nonlinearity
  double blowup_threshold = 1e8;      ///< L2 norm beyond which the step fails
};

inline int dealias_grid_requirement(int N, const std::string& rule) {
  if (rule == "two-thirds") return (3 * (N + 1) + 1) / 2;  // ceil(3(N+1)/2)
  if (rule == "none") return N + 2;
  throw ConfigError("unknown dealias rule: " + rule);
}

inline int effective_grid(const SolverConfig& cfg) {
  return cfg.M > 0 ? cfg.M : dealias_grid_requirement(cfg.N, cfg.dealias);
}

inline void validate_config(const SolverConfig& cfg) {
  if (cfg.N < 0) throw ConfigError("N must be >= 0");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be > 0");
  if (cfg.t_end < 0.0) throw ConfigError("t_end must be >= 0");
  if (cfg.integrator != "imex-rk2")
    throw ConfigError("unknown integrator: " + cfg.integrator);
  const int need = dealias_grid_requirement(cfg.N, cfg.dealias);
  if (effective_grid(cfg) < need)
    throw GridTooCoarse("M=" + std::to_string(effective_grid(cfg)) +
                        " below the dealiasing floor " + std::to_string(need) +
                        " for N=" + std::to_string(cfg.N));
}

/// int u dx = u-coefficient at q = 0 times pi^d.
inline double mass(const SpectralField& w) {
  double vol = kPi;
  for (int i = 1; i < w.d; ++i) vol *= kPi;
  return w.u[0] * vol;
}

namespace detail {

inline SpectralField nonlinear_term_impl(const SpectralField& w, double chi,
                                         const CosinePlan& plan) {
  SpectralField out(w.d, w.N);
  const std::vector<double> grid_u = plan.to_grid(w.u);
  const int n = w.N + 1;
  for (int a = 0; a < w.d; ++a) {
    std::vector<double> prod = plan.deriv_to_grid(w.v, a);
    for (size_t j = 0; j < prod.size(); ++j) prod[j] *= grid_u[j];
    const std::vector<double> sine = plan.odd_to_coeffs(prod, a);
    // d/dx_a turns sine mode m into m * cos(m x_a).
    for (int i = 0; i < out.size(); ++i) {
      int qa;
      if (a == 0) qa = i % n;
      else if (a == 1) qa = (i / n) % n;
      else qa = i / (n * n);
      out.u[i] -= chi * qa * sine[i];
    }
  }
  return out;  // v-component stays zero
}

}  // namespace detail

/// Coefficients of -chi div(u grad v); the v-component is zero.
inline SpectralField nonlinear_term(const SpectralField& w, const ModelParams& p,
                                    const SolverConfig& cfg) {
  if (w.N != cfg.N) throw Error("state truncation does not match config");
  const int M = effective_grid(cfg);
  const int need = dealias_grid_requirement(cfg.N, cfg.dealias);
  if (M < need)
    throw GridTooCoarse("nonlinear_term: M=" + std::to_string(M) +
                        " below dealiasing floor " + std::to_string(need));
  const CosinePlan plan(w.d, w.N, M);
  return detail::nonlinear_term_impl(w, p.chi, plan);
}

class ImexStepper {
public:
  ImexStepper(const ModelParams& p, const SolverConfig& cfg)
      : p_(validate(p)), cfg_(cfg), M_(effective_grid(cfg)),
        plan_(p.d, cfg.N, M_) {
    validate_config(cfg_);
    const int total = detail::cells(p_.d, cfg_.N + 1);
    SpectralField shape(p_.d, cfg_.N);
    eig_.reserve(total);
    for (int i = 0; i < total; ++i) eig_.push_back(eigenpair(p_, shape.mode(i)));
  }

  const SolverConfig& config() const { return cfg_; }

  SpectralField step(const SpectralField& w, double h) {
    if (!(h > 0.0)) throw Error("step: h must be > 0");
    if (w.d != p_.d || w.N != cfg_.N) throw Error("step: state shape mismatch");
    if (h != table_h_) build_tables(h);

    SpectralField out = w;
    if (cfg_.nonlinearity) {
      const SpectralField n1 = detail::nonlinear_term_impl(w, p_.chi, plan_);
      SpectralField mid = w;
      axpy(mid, 0.5 * h, n1);
      apply(half_, mid);
      SpectralField n2 = detail::nonlinear_term_impl(mid, p_.chi, plan_);
      apply(full_, out);
      apply(half_, n2);
      axpy(out, h, n2);
    } else {
      apply(full_, out);
    }

    if (!out.finite() || l2_norm(out) > cfg_.blowup_threshold)
      throw NonFinite("state left the finite regime (blow-up)");
    return out;
  }

private:
  void build_tables(double h) {
    const int total = static_cast<int>(eig_.size());
    full_.resize(total);
    half_.resize(total);
    for (int i = 0; i < total; ++i) {
      full_[i] = mode_exponential(p_, eig_[i], h);
      half_[i] = mode_exponential(p_, eig_[i], 0.5 * h);
    }
    table_h_ = h;
  }

  void apply(const std::vector<Mat2>& table, SpectralField& w) const {
    for (int i = 0; i < w.size(); ++i) table[i].apply(w.u[i], w.v[i]);
  }

  ModelParams p_;
  SolverConfig cfg_;
  int M_;
  CosinePlan plan_;
  std::vector<EigenPair> eig_;
  double table_h_ = -1.0;
  std::vector<Mat2> full_, half_;
};

/// One IMEX step (convenience wrapper; hot loops should hold an ImexStepper).
inline SpectralField step(const SpectralField& w, double dt, const ModelParams& p,
                          const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.dt = dt;
  ImexStepper st(p, c);
  return st.step(w, dt);
}

enum class TrajectoryStatus { completed, blow_up };

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<double> masses;
  TrajectoryStatus status = TrajectoryStatus::completed;
};

/// Advance w0 to cfg.t_end with fixed steps cfg.dt (the final step is
/// shortened to land on t_end exactly), recording every `sample_every`-th
/// state plus the initial and final one. Stops early with blow_up status if a
/// step leaves the finite regime; the last recorded time is the last good one.
inline Trajectory simulate(const SpectralField& w0, const ModelParams& p,
                           const SolverConfig& cfg, int sample_every = 1) {
  validate_config(cfg);
  if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
  if (!w0.finite()) throw NonFinite("initial state is not finite");

  Trajectory tr;
  ImexStepper st(p, cfg);
  SpectralField state = w0;
  const double T = cfg.t_end;
  const double eps = 1e-12 * std::max(1.0, T);

  tr.times.push_back(0.0);
  tr.states.push_back(state);
  tr.masses.push_back(mass(state));

  long k = 0;
  double t = 0.0;
  while (t < T - eps) {
    const double t_next = std::min(T, (k + 1) * cfg.dt);
    try {
      state = st.step(state, t_next - t);
    } catch (const NonFinite&) {
      tr.status = TrajectoryStatus::blow_up;
      return tr;
    }
    ++k;
    t = t_next;
    if (k % sample_every == 0 || t >= T - eps) {
      tr.times.push_back(t);
      tr.states.push_back(state);
      tr.masses.push_back(mass(state));
    }
  }
  return tr;
}

}  // namespace ks
