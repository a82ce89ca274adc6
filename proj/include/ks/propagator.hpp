#pragma once
// Field-level closed-form flow of the linearized system: decomposition of a
// field onto the two eigen-branches per mode, the exact propagator e^{Lt},
// and the projection onto the fastest-growing modes. Propagation is never
// time-stepped; it is the oracle the nonlinear solver is checked against.

#include <cmath>
#include <string>
#include <vector>

#include "ks/dispersion.hpp"
#include "ks/spectral.hpp"

namespace ks {

/// Branch weights w_q^- , w_q^+ with w_q = w_q^- r_-(q) + w_q^+ r_+(q).
struct ModalDecomposition {
  int d = 1;
  int N = 0;
  std::vector<double> minus, plus;
};

namespace detail {

inline void require_covers(const SpectralField& f, const SpectrumSummary& s) {
  if (s.params.d != f.d || s.N < f.N)
    throw Error("spectrum does not cover the field's truncation");
}

}  // namespace detail

inline ModalDecomposition decompose(const SpectralField& f, const SpectrumSummary& s) {
  detail::require_covers(f, s);
  ModalDecomposition md;
  md.d = f.d;
  md.N = f.N;
  md.minus.resize(f.size());
  md.plus.resize(f.size());
  for (int i = 0; i < f.size(); ++i) {
    const EigenPair& e = s.pair(f.mode(i));
    // Both eigenvectors have v-component 1, so det[r_-, r_+] = r_-.u - r_+.u.
    const double det = e.r_minus.u - e.r_plus.u;
    if (std::fabs(det) < 1e-14)
      throw DegenerateEigenbasis("eigenvectors nearly parallel at q^2=" +
                                 std::to_string(e.q.q_squared()));
    md.plus[i] = (f.u[i] - e.r_minus.u * f.v[i]) / (e.r_plus.u - e.r_minus.u);
    md.minus[i] = f.v[i] - md.plus[i];
  }
  return md;
}

inline SpectralField recompose(const ModalDecomposition& md, const SpectrumSummary& s) {
  SpectralField f(md.d, md.N);
  for (int i = 0; i < f.size(); ++i) {
    const EigenPair& e = s.pair(f.mode(i));
    f.u[i] = md.minus[i] * e.r_minus.u + md.plus[i] * e.r_plus.u;
    f.v[i] = md.minus[i] + md.plus[i];
  }
  return f;
}

/// Exact solution of the linearized system at time t >= 0.
inline SpectralField propagate(const SpectralField& f, double t, const SpectrumSummary& s) {
  detail::require_covers(f, s);
  if (t < 0.0) throw Error("propagate: negative time");
  SpectralField out = f;
  for (int i = 0; i < f.size(); ++i) {
    const Mat2 E = mode_exponential(s.params, s.pair(f.mode(i)), t);
    E.apply(out.u[i], out.v[i]);
  }
  return out;
}

/// e^{lambda_max t} sum over the maximal modes of w_q^+ r_+(q) e_q: the
/// plus-branch of the fastest-growing modes only.
inline SpectralField dominant_projection(const SpectralField& f, double t,
                                         const SpectrumSummary& s) {
  detail::require_covers(f, s);
  if (t < 0.0) throw Error("dominant_projection: negative time");
  if (s.lambda_max * t > 700.0)
    throw Overflow("dominant_projection overflows: lambda_max*t = " +
                   std::to_string(s.lambda_max * t));
  const double growth = std::exp(s.lambda_max * t);
  SpectralField out(f.d, f.N);
  for (int i = 0; i < f.size(); ++i) {
    const ModeIndex m = f.mode(i);
    if (!s.is_dominant(m)) continue;
    const EigenPair& e = s.pair(m);
    const double det = e.r_minus.u - e.r_plus.u;
    if (std::fabs(det) < 1e-14)
      throw DegenerateEigenbasis("eigenvectors nearly parallel at q^2=" +
                                 std::to_string(e.q.q_squared()));
    const double wp = (f.u[i] - e.r_minus.u * f.v[i]) / (e.r_plus.u - e.r_minus.u);
    out.u[i] = growth * wp * e.r_plus.u;
    out.v[i] = growth * wp;
  }
  return out;
}

}  // namespace ks
