#pragma once

#include <optional>

#include "ks/errors.hpp"

namespace ks {

/// Physical parameters of the chemotaxis system on the box (0,pi)^d.
struct ModelParams {
  double mu = 1.0;     ///< cell motility
  double chi = 1.0;    ///< chemotactic sensitivity
  double D = 1.0;      ///< diffusion rate of the chemo-attractant
  double f = 1.0;      ///< secretion rate per unit cell density
  double k = 1.0;      ///< degradation rate of the chemo-attractant
  double U_bar = 1.0;  ///< homogeneous cell density
  int d = 1;           ///< spatial dimension, 1..3
};

/// The constant state (U_bar, V_bar) with f*U_bar = k*V_bar.
struct SteadyState {
  double U_bar = 0.0;
  double V_bar = 0.0;
};

inline ModelParams validate(const ModelParams& p) {
  if (!(p.mu > 0.0)) throw NonPositiveParameter("mu");
  if (!(p.chi > 0.0)) throw NonPositiveParameter("chi");
  if (!(p.D > 0.0)) throw NonPositiveParameter("D");
  if (!(p.f > 0.0)) throw NonPositiveParameter("f");
  if (!(p.k > 0.0)) throw NonPositiveParameter("k");
  if (!(p.U_bar > 0.0)) throw NonPositiveParameter("U_bar");
  if (p.d < 1 || p.d > 3) throw BadDimension(p.d);
  return p;
}

inline SteadyState steady_state(const ModelParams& p) {
  validate(p);
  return SteadyState{p.U_bar, p.f * p.U_bar / p.k};
}

/// Threshold q_c^2 = (chi*U_bar*f - mu*k) / (mu*D). Modes with
/// 0 < q^2 < q_c^2 grow linearly; returns nullopt when no mode does
/// (chi*U_bar*f <= mu*k, strict criterion).
inline std::optional<double> critical_wavenumber_squared(const ModelParams& p) {
  validate(p);
  const double excess = p.chi * p.U_bar * p.f - p.mu * p.k;
  if (excess <= 0.0) return std::nullopt;
  return excess / (p.mu * p.D);
}

}  // namespace ks
