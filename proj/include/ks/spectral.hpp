#pragma once
// Cosine-basis fields on the box (0,pi)^d.
//
// A field pair w = [u, v] is stored either as expansion coefficients against
// the unnormalized basis e_q(x) = prod_i cos(q_i x_i), q in {0..N}^d
// (SpectralField), or as point samples on the midpoint collocation grid
// x_j = (j + 1/2) pi / M (GridField). On midpoint nodes both the cosine and
// the sine orthogonality sums are exact for modes below the grid size, so
// analyze() inverts synthesize() for band-limited data and no node sits on
// the boundary, where the sine factors of differentiated series vanish.
//
// Norms carry the squared basis norm gamma_q = pi^d / 2^{#nonzero(q)}
// explicitly; coefficients are never rescaled.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "ks/errors.hpp"

namespace ks {

inline constexpr double kPi = std::numbers::pi;

struct ModeIndex {
  std::array<int, 3> q{0, 0, 0};
  int d = 1;

  int q_squared() const {
    int s = 0;
    for (int i = 0; i < d; ++i) s += q[i] * q[i];
    return s;
  }

  int nonzero_components() const {
    int n = 0;
    for (int i = 0; i < d; ++i) n += (q[i] != 0);
    return n;
  }

  friend bool operator==(const ModeIndex& a, const ModeIndex& b) {
    if (a.d != b.d) return false;
    for (int i = 0; i < a.d; ++i)
      if (a.q[i] != b.q[i]) return false;
    return true;
  }
};

namespace detail {

inline int cells(int d, int n) {
  int t = n;
  if (d > 1) t *= n;
  if (d > 2) t *= n;
  return t;
}

inline std::array<int, 3> extents(int d, int n) {
  return {n, d > 1 ? n : 1, d > 2 ? n : 1};
}

}  // namespace detail

struct SpectralField {
  int d = 1;
  int N = 0;
  std::vector<double> u, v;  // flat, mode (q0,q1,q2) at q0 + (N+1)*(q1 + (N+1)*q2)

  SpectralField() = default;
  SpectralField(int d_, int N_)
      : d(d_),
        N(N_),
        u(detail::cells(d_, N_ + 1), 0.0),
        v(detail::cells(d_, N_ + 1), 0.0) {}

  int size() const { return static_cast<int>(u.size()); }

  int flat(const ModeIndex& m) const {
    const int n = N + 1;
    return m.q[0] + n * (m.q[1] + n * m.q[2]);
  }

  ModeIndex mode(int flat_index) const {
    const int n = N + 1;
    ModeIndex m;
    m.d = d;
    m.q[0] = flat_index % n;
    if (d > 1) m.q[1] = (flat_index / n) % n;
    if (d > 2) m.q[2] = flat_index / (n * n);
    return m;
  }

  bool finite() const {
    for (double x : u)
      if (!std::isfinite(x)) return false;
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

struct GridField {
  int d = 1;
  int M = 0;
  std::vector<double> u, v;  // flat, node (j0,j1,j2) at j0 + M*(j1 + M*j2)

  GridField() = default;
  GridField(int d_, int M_)
      : d(d_),
        M(M_),
        u(detail::cells(d_, M_), 0.0),
        v(detail::cells(d_, M_), 0.0) {}

  int size() const { return static_cast<int>(u.size()); }
};

namespace detail {

inline void require_same_shape(const SpectralField& a, const SpectralField& b) {
  if (a.d != b.d || a.N != b.N)
    throw Error("spectral field shape mismatch");
}

}  // namespace detail

inline SpectralField& operator+=(SpectralField& a, const SpectralField& b) {
  detail::require_same_shape(a, b);
  for (int i = 0; i < a.size(); ++i) {
    a.u[i] += b.u[i];
    a.v[i] += b.v[i];
  }
  return a;
}

inline SpectralField& operator-=(SpectralField& a, const SpectralField& b) {
  detail::require_same_shape(a, b);
  for (int i = 0; i < a.size(); ++i) {
    a.u[i] -= b.u[i];
    a.v[i] -= b.v[i];
  }
  return a;
}

inline SpectralField& operator*=(SpectralField& a, double s) {
  for (int i = 0; i < a.size(); ++i) {
    a.u[i] *= s;
    a.v[i] *= s;
  }
  return a;
}

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

/// a += s * b
inline void axpy(SpectralField& a, double s, const SpectralField& b) {
  detail::require_same_shape(a, b);
  for (int i = 0; i < a.size(); ++i) {
    a.u[i] += s * b.u[i];
    a.v[i] += s * b.v[i];
  }
}

/// Squared basis norm int e_q^2 = pi^d / 2^{#nonzero components}.
inline double gamma_weight(const ModeIndex& m) {
  double g = 1.0;
  for (int i = 0; i < m.d; ++i) g *= (m.q[i] == 0) ? kPi : 0.5 * kPi;
  return g;
}

inline double l2_norm(const SpectralField& w) {
  double s = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const ModeIndex m = w.mode(i);
    s += gamma_weight(m) * (w.u[i] * w.u[i] + w.v[i] * w.v[i]);
  }
  return std::sqrt(s);
}

/// Modal H^2 norm: sqrt(sum_q (1+q^2)^2 (u_q^2 + v_q^2) gamma_q).
inline double h2_norm(const SpectralField& w) {
  double s = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const ModeIndex m = w.mode(i);
    const double a = 1.0 + m.q_squared();
    s += a * a * gamma_weight(m) * (w.u[i] * w.u[i] + w.v[i] * w.v[i]);
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Transforms. Naive separable O(M*N) per line; plenty at desk scale.
// ---------------------------------------------------------------------------

class CosinePlan {
public:
  CosinePlan(int d, int N, int M) : d_(d), N_(N), M_(M) {
    if (M < N + 1)
      throw GridTooCoarse("grid M=" + std::to_string(M) +
                          " cannot resolve truncation N=" + std::to_string(N));
    const int n = N + 1;
    cos_syn_.resize(static_cast<size_t>(M) * n);
    sin_syn_.resize(static_cast<size_t>(M) * n);
    cos_ana_.resize(static_cast<size_t>(n) * M);
    sin_ana_.resize(static_cast<size_t>(n) * M);
    for (int j = 0; j < M; ++j) {
      const double x = node(M, j);
      for (int m = 0; m < n; ++m) {
        cos_syn_[static_cast<size_t>(j) * n + m] = std::cos(m * x);
        sin_syn_[static_cast<size_t>(j) * n + m] = std::sin(m * x);
      }
    }
    for (int m = 0; m < n; ++m) {
      const double scale = (m == 0 ? 1.0 : 2.0) / M;
      for (int j = 0; j < M; ++j) {
        const double x = node(M, j);
        cos_ana_[static_cast<size_t>(m) * M + j] = scale * std::cos(m * x);
        sin_ana_[static_cast<size_t>(m) * M + j] =
            (m == 0) ? 0.0 : (2.0 / M) * std::sin(m * x);
      }
    }
  }

  static double node(int M, int j) { return (j + 0.5) * kPi / M; }

  int d() const { return d_; }
  int N() const { return N_; }
  int M() const { return M_; }

  /// Coefficients -> samples (cosine along every axis).
  std::vector<double> to_grid(const std::vector<double>& coeffs) const {
    std::vector<double> cur = coeffs;
    std::array<int, 3> ext = detail::extents(d_, N_ + 1);
    for (int a = 0; a < d_; ++a) cur = apply_axis(cur, ext, a, cos_syn_.data(), M_);
    return cur;
  }

  /// Samples -> coefficients (cosine along every axis). Exact for content of
  /// degree <= M-1 per axis; higher content aliases.
  std::vector<double> to_coeffs(const std::vector<double>& samples) const {
    std::vector<double> cur = samples;
    std::array<int, 3> ext = detail::extents(d_, M_);
    for (int a = 0; a < d_; ++a) cur = apply_axis(cur, ext, a, cos_ana_.data(), N_ + 1);
    return cur;
  }

  /// Samples of d/dx_axis of the cosine series with the given coefficients.
  std::vector<double> deriv_to_grid(const std::vector<double>& coeffs, int axis) const {
    // d/dx cos(m x) = -m sin(m x): sine series along `axis`.
    std::vector<double> cur(coeffs.size());
    std::array<int, 3> ext = detail::extents(d_, N_ + 1);
    for (size_t i = 0; i < coeffs.size(); ++i)
      cur[i] = -axis_component(static_cast<int>(i), axis) * coeffs[i];
    for (int a = 0; a < d_; ++a)
      cur = apply_axis(cur, ext, a, a == axis ? sin_syn_.data() : cos_syn_.data(), M_);
    return cur;
  }

  /// Coefficients of samples that are odd along `axis` (sine modes 1..N there,
  /// slot 0 of that axis is zero) and even along the other axes.
  std::vector<double> odd_to_coeffs(const std::vector<double>& samples, int axis) const {
    std::vector<double> cur = samples;
    std::array<int, 3> ext = detail::extents(d_, M_);
    for (int a = 0; a < d_; ++a)
      cur = apply_axis(cur, ext, a, a == axis ? sin_ana_.data() : cos_ana_.data(), N_ + 1);
    return cur;
  }

private:
  int axis_component(int flat, int axis) const {
    const int n = N_ + 1;
    if (axis == 0) return flat % n;
    if (axis == 1) return (flat / n) % n;
    return flat / (n * n);
  }

  // out[..., o, ...] = sum_m T[o*n_in + m] * in[..., m, ...] along `axis`.
  static std::vector<double> apply_axis(const std::vector<double>& in,
                                        std::array<int, 3>& ext, int axis,
                                        const double* T, int n_out) {
    const int n_in = ext[axis];
    int stride = 1;
    for (int a = 0; a < axis; ++a) stride *= ext[a];
    int hi = 1;
    for (int a = axis + 1; a < 3; ++a) hi *= ext[a];

    std::vector<double> out(static_cast<size_t>(stride) * n_out * hi, 0.0);
    if (stride == 1) {
      for (int h = 0; h < hi; ++h) {
        const double* irow = in.data() + static_cast<size_t>(h) * n_in;
        double* orow = out.data() + static_cast<size_t>(h) * n_out;
        for (int o = 0; o < n_out; ++o) {
          const double* trow = T + static_cast<size_t>(o) * n_in;
          double acc = 0.0;
          for (int m = 0; m < n_in; ++m) acc += trow[m] * irow[m];
          orow[o] = acc;
        }
      }
    } else {
      for (int h = 0; h < hi; ++h) {
        for (int o = 0; o < n_out; ++o) {
          const double* trow = T + static_cast<size_t>(o) * n_in;
          double* orow = out.data() + (static_cast<size_t>(h) * n_out + o) * stride;
          for (int m = 0; m < n_in; ++m) {
            const double w = trow[m];
            const double* irow = in.data() + (static_cast<size_t>(h) * n_in + m) * stride;
            for (int l = 0; l < stride; ++l) orow[l] += w * irow[l];
          }
        }
      }
    }
    ext[axis] = n_out;
    return out;
  }

  int d_, N_, M_;
  std::vector<double> cos_syn_, sin_syn_, cos_ana_, sin_ana_;
};

/// Evaluate sum_q w_q e_q at the M^d midpoint nodes.
inline GridField synthesize(const SpectralField& f, int M) {
  if (M < f.N + 1)
    throw GridTooCoarse("synthesize: need M >= N+1, got M=" + std::to_string(M) +
                        ", N=" + std::to_string(f.N));
  const CosinePlan plan(f.d, f.N, M);
  GridField g(f.d, M);
  g.u = plan.to_grid(f.u);
  g.v = plan.to_grid(f.v);
  return g;
}

/// Extract coefficients up to truncation N from grid samples. Exact for
/// band-limited input resolved by the grid; under-resolved content aliases.
inline SpectralField analyze(const GridField& g, int N) {
  if (g.M < N + 1)
    throw GridTooCoarse("analyze: need M >= N+1, got M=" + std::to_string(g.M) +
                        ", N=" + std::to_string(N));
  const CosinePlan plan(g.d, N, g.M);
  SpectralField f(g.d, N);
  f.u = plan.to_coeffs(g.u);
  f.v = plan.to_coeffs(g.v);
  return f;
}

/// Partial derivatives of both components, evaluated on the grid by
/// differentiating the cosine series term-wise. Entry a holds d/dx_a.
inline std::vector<GridField> gradient_on_grid(const SpectralField& f, int M) {
  if (M < f.N + 2)
    throw GridTooCoarse("gradient_on_grid: need M >= N+2, got M=" + std::to_string(M) +
                        ", N=" + std::to_string(f.N));
  const CosinePlan plan(f.d, f.N, M);
  std::vector<GridField> grad;
  grad.reserve(f.d);
  for (int a = 0; a < f.d; ++a) {
    GridField g(f.d, M);
    g.u = plan.deriv_to_grid(f.u, a);
    g.v = plan.deriv_to_grid(f.v, a);
    grad.push_back(std::move(g));
  }
  return grad;
}

}  // namespace ks
