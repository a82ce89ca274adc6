#pragma once
// Shared helpers for the test suites.

#include <cmath>
#include <vector>

#include "ks/model.hpp"
#include "ks/random.hpp"
#include "ks/spectral.hpp"

namespace kstest {

/// The parameter set used throughout: unstable with exactly q^2 = 1 growing.
inline ks::ModelParams flagship(int d = 2) {
  ks::ModelParams p;
  p.mu = p.chi = p.D = p.f = p.k = 1.0;
  p.U_bar = 3.0;
  p.d = d;
  return p;
}

inline ks::ModelParams stable_params(int d = 2) {
  ks::ModelParams p;
  p.mu = p.chi = p.D = p.f = p.k = 1.0;
  p.U_bar = 1.0;
  p.d = d;
  return p;
}

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

inline double rel_diff(const ks::SpectralField& a, const ks::SpectralField& b) {
  return ks::l2_norm(a - b) / std::max(1e-300, ks::l2_norm(b));
}

/// Random parameter set satisfying the instability criterion, components
/// log-uniform in [0.1, 10].
inline ks::ModelParams random_unstable_params(ks::Rng& rng, int d) {
  auto lu = [&rng] { return std::pow(10.0, 2.0 * rng.uniform() - 1.0); };
  while (true) {
    ks::ModelParams p;
    p.mu = lu();
    p.chi = lu();
    p.D = lu();
    p.f = lu();
    p.k = lu();
    p.U_bar = lu();
    p.d = d;
    if (p.chi * p.U_bar * p.f > p.mu * p.k) return p;
  }
}

}  // namespace kstest
