#pragma once
// Per-mode linear analysis. For mode q the linearized system reduces to the
// 2x2 matrix
//
//     A_q = [ -mu q^2        chi U_bar q^2 ]
//           [  f             -(D q^2 + k)  ]
//
// whose characteristic quadratic is
//
//     lambda^2 + (q^2 (mu + D) + k) lambda + q^2 (mu (D q^2 + k) - chi U_bar f) = 0.
//
// Its discriminant equals (q^2 (mu - D) - k)^2 + 4 q^2 chi U_bar f, which is
// strictly positive for every admissible parameter set, so the roots are real
// and distinct and that form is the cancellation-free way to compute them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ks/errors.hpp"
#include "ks/model.hpp"
#include "ks/random.hpp"
#include "ks/spectral.hpp"

namespace ks {

struct Vec2 {
  double u = 0.0;
  double v = 0.0;
};

struct EigenPair {
  ModeIndex q;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  Vec2 r_minus;
  Vec2 r_plus;
};

inline EigenPair eigenpair(const ModelParams& p, const ModeIndex& m) {
  const double q2 = m.q_squared();
  const double b = q2 * (p.mu + p.D) + p.k;
  const double c = q2 * (p.mu * (p.D * q2 + p.k) - p.chi * p.U_bar * p.f);
  const double root_gap = q2 * (p.mu - p.D) - p.k;
  const double disc = root_gap * root_gap + 4.0 * q2 * p.chi * p.U_bar * p.f;
  if (!(disc > 0.0))
    throw NumericalContradiction("dispersion discriminant not positive at q^2=" +
                                 std::to_string(q2));
  const double s = std::sqrt(disc);
  const double lm = 0.5 * (-b - s);  // b > 0: larger-magnitude root first
  double lp = c / lm;                // companion root via Vieta
  if (lp == 0.0) lp = 0.0;           // normalize -0

  EigenPair e;
  e.q = m;
  e.lambda_minus = lm;
  e.lambda_plus = lp;
  e.r_minus = Vec2{(lm + p.D * q2 + p.k) / p.f, 1.0};
  e.r_plus = Vec2{(lp + p.D * q2 + p.k) / p.f, 1.0};
  return e;
}

struct SpectrumSummary {
  ModelParams params;
  int N = 0;
  std::vector<EigenPair> pairs;       // flat order over {0..N}^d
  std::vector<char> dominant_flags;   // parallel to pairs
  double lambda_max = 0.0;
  std::vector<ModeIndex> omega_max;
  std::vector<ModeIndex> unstable;    // lambda_plus > 0
  double nu = 0.0;                    // gap to every other eigenvalue

  int flat(const ModeIndex& m) const {
    const int n = N + 1;
    return m.q[0] + n * (m.q[1] + n * m.q[2]);
  }
  const EigenPair& pair(const ModeIndex& m) const { return pairs[flat(m)]; }
  bool is_dominant(const ModeIndex& m) const { return dominant_flags[flat(m)] != 0; }
};

/// Eigenpairs for all modes of the truncation plus the spectrum summary:
/// lambda_max, the set of modes attaining it (ties within 1e-12 relative),
/// the unstable set, and the gap nu between lambda_max and the maximum over
/// all remaining eigenvalues (lambda_plus of non-dominant modes and
/// lambda_minus everywhere).
inline SpectrumSummary spectrum_summary(const ModelParams& p, int N) {
  validate(p);
  if (N < 0) throw TruncationTooSmall("truncation N must be >= 0");
  if (const auto q2c = critical_wavenumber_squared(p)) {
    if (static_cast<double>(N) * N < *q2c)
      throw TruncationTooSmall("truncation N=" + std::to_string(N) +
                               " does not cover unstable modes, q_c^2=" +
                               std::to_string(*q2c));
  }

  SpectrumSummary s;
  s.params = p;
  s.N = N;
  const int total = detail::cells(p.d, N + 1);
  s.pairs.reserve(total);
  s.dominant_flags.assign(total, 0);

  SpectralField shape(p.d, N);  // for mode enumeration only
  s.lambda_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < total; ++i) {
    s.pairs.push_back(eigenpair(p, shape.mode(i)));
    if (s.pairs.back().lambda_plus > s.lambda_max)
      s.lambda_max = s.pairs.back().lambda_plus;
  }

  const double tie_tol = 1e-12 * std::max(1.0, std::fabs(s.lambda_max));
  double rest = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < total; ++i) {
    const EigenPair& e = s.pairs[i];
    if (e.lambda_plus >= s.lambda_max - tie_tol) {
      s.dominant_flags[i] = 1;
      s.omega_max.push_back(e.q);
    } else {
      rest = std::max(rest, e.lambda_plus);
    }
    if (e.lambda_plus > 0.0) s.unstable.push_back(e.q);
    rest = std::max(rest, e.lambda_minus);
  }
  s.nu = s.lambda_max - rest;
  return s;
}

// ---------------------------------------------------------------------------
// Exact per-mode flow. e^{A_q t} in spectral-projector form,
//   e^{A t} = e^{l+ t} (A - l- I)/(l+ - l-) + e^{l- t} (A - l+ I)/(l- - l+),
// which is stable because l+ - l- = sqrt(disc) >= k > 0, and keeps the
// q = 0 block exactly [[1, 0], [*, e^{-k t}]] so the mean of u never moves.
// ---------------------------------------------------------------------------

struct Mat2 {
  double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

  void apply(double& x, double& y) const {
    const double x2 = a00 * x + a01 * y;
    const double y2 = a10 * x + a11 * y;
    x = x2;
    y = y2;
  }
};

inline Mat2 mode_exponential(const ModelParams& p, const EigenPair& e, double t) {
  if (e.lambda_plus * t > 700.0)
    throw Overflow("mode exponential overflows: lambda*t = " +
                   std::to_string(e.lambda_plus * t));
  const double q2 = e.q.q_squared();
  const double a00 = -p.mu * q2;
  const double a01 = p.chi * p.U_bar * q2;
  const double a10 = p.f;
  const double a11 = -(p.D * q2 + p.k);
  const double den = e.lambda_plus - e.lambda_minus;
  const double ep = std::exp(e.lambda_plus * t);
  const double em = std::exp(e.lambda_minus * t);
  Mat2 E;
  E.a00 = (ep * (a00 - e.lambda_minus) - em * (a00 - e.lambda_plus)) / den;
  E.a01 = (ep - em) * a01 / den;
  E.a10 = (ep - em) * a10 / den;
  E.a11 = (ep * (a11 - e.lambda_minus) - em * (a11 - e.lambda_plus)) / den;
  return E;
}

/// Largest singular value of a 2x2 matrix.
inline double spectral_norm(const Mat2& E) {
  const double t = E.a00 * E.a00 + E.a01 * E.a01 + E.a10 * E.a10 + E.a11 * E.a11;
  const double det = E.a00 * E.a11 - E.a01 * E.a10;
  const double h = std::sqrt(std::max(0.0, t * t - 4.0 * det * det));
  return std::sqrt(0.5 * (t + h));
}

/// Empirical growth constant: the largest observed value of
/// ||e^{Lt} w0|| e^{-lambda_max t} over `trials` random unit-L2 fields and a
/// fixed time grid. Per-mode operator norms are scanned on the same grid,
/// which dominates every field the sampling could draw, so the estimate is a
/// sound bound for sampled times rather than a lucky maximum. Always >= 1
/// (t = 0 is on the grid).
inline double growth_constant_estimate(const ModelParams& p, int N, int trials,
                                       std::uint64_t seed = 0x9e3779b9u) {
  const SpectrumSummary spec = spectrum_summary(p, N);
  const double lam = spec.lambda_max;
  const double t_probe = 8.0 / std::max(lam, 0.25);
  const int nt = 33;
  const int total = static_cast<int>(spec.pairs.size());

  std::vector<Mat2> tables(static_cast<size_t>(nt) * total);
  double best = 1.0;
  for (int it = 0; it < nt; ++it) {
    const double t = t_probe * it / (nt - 1);
    const double damp = std::exp(-lam * t);
    double worst_mode = 0.0;
    for (int i = 0; i < total; ++i) {
      const Mat2 E = mode_exponential(p, spec.pairs[i], t);
      tables[static_cast<size_t>(it) * total + i] = E;
      worst_mode = std::max(worst_mode, spectral_norm(E));
    }
    best = std::max(best, worst_mode * damp);
  }

  Rng rng(seed);
  std::vector<double> gamma(total);
  {
    SpectralField shape(p.d, N);
    for (int i = 0; i < total; ++i) gamma[i] = gamma_weight(shape.mode(i));
  }
  for (int s = 0; s < trials; ++s) {
    const SpectralField w = random_unit_field(p.d, N, rng);
    for (int it = 0; it < nt; ++it) {
      const double t = t_probe * it / (nt - 1);
      double norm2 = 0.0;
      for (int i = 0; i < total; ++i) {
        double x = w.u[i], y = w.v[i];
        tables[static_cast<size_t>(it) * total + i].apply(x, y);
        norm2 += gamma[i] * (x * x + y * y);
      }
      best = std::max(best, std::sqrt(norm2) * std::exp(-lam * t));
    }
  }
  return best;
}

}  // namespace ks
