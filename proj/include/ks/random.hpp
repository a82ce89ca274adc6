#pragma once
// Seeded randomness with an explicit bits-to-double mapping, so a given seed
// produces the same fields on every platform and standard library.

#include <cmath>
#include <cstdint>
#include <random>

#include "ks/spectral.hpp"

namespace ks {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline SpectralField random_field(int d, int N, Rng& rng) {
  SpectralField f(d, N);
  for (int i = 0; i < f.size(); ++i) {
    f.u[i] = rng.normal();
    f.v[i] = rng.normal();
  }
  return f;
}

/// Random field normalized to unit L2 norm.
inline SpectralField random_unit_field(int d, int N, Rng& rng) {
  SpectralField f = random_field(d, N, rng);
  const double n = l2_norm(f);
  f *= 1.0 / n;
  return f;
}

}  // namespace ks
