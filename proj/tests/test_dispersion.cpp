#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "common.hpp"
#include "ks/dispersion.hpp"

using namespace ks;

namespace {

// Independent long-double quadratic oracle for
// lambda^2 + b lambda + c = 0 with b = q^2(mu+D)+k, c = q^2(mu(Dq^2+k)-chi U f).
struct QuadRoots {
  double minus, plus;
};

QuadRoots quadratic_oracle(const ModelParams& p, double q2) {
  const long double b = (long double)q2 * (p.mu + p.D) + p.k;
  const long double c =
      (long double)q2 * ((long double)p.mu * (p.D * q2 + p.k) - (long double)p.chi * p.U_bar * p.f);
  const long double s = sqrtl(b * b - 4.0L * c);
  return {static_cast<double>((-b - s) / 2.0L), static_cast<double>((-b + s) / 2.0L)};
}

double residual(const ModelParams& p, double q2, double lam) {
  const double b = q2 * (p.mu + p.D) + p.k;
  const double c = q2 * (p.mu * (p.D * q2 + p.k) - p.chi * p.U_bar * p.f);
  return std::fabs(lam * lam + b * lam + c);
}

ModeIndex mode1d(int q) {
  ModeIndex m;
  m.d = 1;
  m.q = {q, 0, 0};
  return m;
}

ModeIndex mode2d(int q0, int q1) {
  ModeIndex m;
  m.d = 2;
  m.q = {q0, q1, 0};
  return m;
}

}  // namespace

TEST(EigenPairOp, FlagshipHandValues) {
  const ModelParams p = kstest::flagship(1);

  // q^2 = 0: quadratic degenerates to lambda(lambda + k) = 0.
  EigenPair e0 = eigenpair(p, mode1d(0));
  EXPECT_EQ(e0.lambda_plus, 0.0);
  EXPECT_DOUBLE_EQ(e0.lambda_minus, -1.0);
  EXPECT_DOUBLE_EQ(e0.r_plus.u, 1.0);
  EXPECT_DOUBLE_EQ(e0.r_plus.v, 1.0);

  // q^2 = 1: lambda^2 + 3 lambda - 1 = 0.
  EigenPair e1 = eigenpair(p, mode1d(1));
  const QuadRoots r1 = quadratic_oracle(p, 1.0);
  EXPECT_NEAR(e1.lambda_plus, r1.plus, 1e-15);
  EXPECT_NEAR(e1.lambda_minus, r1.minus, 1e-15);
  EXPECT_NEAR(e1.lambda_plus, 0.3027756377319946, 1e-13);
  EXPECT_NEAR(e1.lambda_minus, -3.3027756377319946, 1e-13);
  EXPECT_NEAR(e1.r_plus.u, 2.3027756377319946, 1e-13);

  // q^2 = 2: constant term vanishes; lambda_plus = 0 exactly.
  EigenPair e2 = eigenpair(p, mode2d(1, 1));
  EXPECT_EQ(e2.lambda_plus, 0.0);
  EXPECT_DOUBLE_EQ(e2.lambda_minus, -5.0);
}

TEST(EigenPairOp, RootResidualBound) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelParams p = kstest::random_unstable_params(rng, 2);
    const int N = 8;
    for (int q0 = 0; q0 <= N; ++q0)
      for (int q1 = 0; q1 <= N; ++q1) {
        const EigenPair e = eigenpair(p, mode2d(q0, q1));
        const double q2 = q0 * q0 + q1 * q1;
        const double bound = 1e-10 * std::max(1.0, q2 * q2);
        EXPECT_LE(residual(p, q2, e.lambda_plus), bound);
        EXPECT_LE(residual(p, q2, e.lambda_minus), bound);
        EXPECT_LT(e.lambda_minus, e.lambda_plus);
        // eigenvector construction, exact as written
        EXPECT_DOUBLE_EQ(e.r_plus.u, (e.lambda_plus + p.D * q2 + p.k) / p.f);
        EXPECT_DOUBLE_EQ(e.r_minus.u, (e.lambda_minus + p.D * q2 + p.k) / p.f);
      }
  }
}

TEST(EigenPairOp, DiscriminantIdentityAndVieta) {
  Rng rng(5);
  for (int trial = 0; trial < 10000; ++trial) {
    const ModelParams p = kstest::random_unstable_params(rng, 1);
    const double q2 = std::floor(rng.uniform() * 12.0);
    const EigenPair e = eigenpair(p, mode1d(static_cast<int>(std::sqrt(q2))));
    const double qq = e.q.q_squared();

    const double b = qq * (p.mu + p.D) + p.k;
    const double c = qq * (p.mu * (p.D * qq + p.k) - p.chi * p.U_bar * p.f);
    const double direct = b * b - 4.0 * c;
    const double expanded = qq * qq * (p.mu - p.D) * (p.mu - p.D) + p.k * p.k +
                            2.0 * qq * (p.mu + p.D) * p.k +
                            4.0 * qq * (p.chi * p.U_bar * p.f - p.mu * p.k);
    EXPECT_GT(expanded, 0.0);
    EXPECT_LE(std::fabs(direct - expanded), 1e-9 * std::max(1.0, std::fabs(expanded)));

    // Vieta
    const double sum = e.lambda_plus + e.lambda_minus;
    const double prod = e.lambda_plus * e.lambda_minus;
    EXPECT_LE(std::fabs(sum + b), 1e-9 * std::max(1.0, std::fabs(b)));
    EXPECT_LE(std::fabs(prod - c), 1e-9 * std::max(1.0, std::fabs(c)));
  }
}

TEST(EigenPairOp, LargeModeAsymptotics) {
  // lambda_+/q^2 -> -min(mu,D), lambda_-/q^2 -> -max(mu,D). The finite-q
  // correction is ~ (chi U f / |mu - D| + k)/q^2, so draw parameters with
  // the diffusivities separated to be inside the asymptotic regime at
  // q^2 = 1e4: correction <= (8/0.3 + 2)/1e4 ~ 3e-3 < 5% of min(mu,D).
  Rng rng(6);
  auto draw = [&rng] { return 0.5 + 1.5 * rng.uniform(); };
  for (int trial = 0; trial < 100; ++trial) {
    ModelParams p;
    p.d = 1;
    do {
      p.mu = draw();
      p.D = draw();
    } while (std::fabs(p.mu - p.D) < 0.3);
    p.chi = draw();
    p.U_bar = draw();
    p.f = draw();
    p.k = draw();
    const EigenPair e = eigenpair(p, mode1d(100));  // q^2 = 1e4
    const double q2 = 1e4;
    EXPECT_LE(std::fabs(e.lambda_plus / q2 + std::min(p.mu, p.D)),
              0.05 * std::min(p.mu, p.D));
    EXPECT_LE(std::fabs(e.lambda_minus / q2 + std::max(p.mu, p.D)),
              0.05 * std::max(p.mu, p.D));
  }
}

TEST(EigenPairOp, CriterionEquivalence) {
  Rng rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    ModelParams p = kstest::random_unstable_params(rng, 1);
    if (trial % 2 == 0) std::swap(p.U_bar, p.mu);
    const int q = static_cast<int>(rng.uniform() * 6.0);
    const EigenPair e = eigenpair(p, mode1d(q));
    const double q2 = q * q;
    const bool criterion = q2 > 0.0 && p.mu * (p.D * q2 + p.k) - p.chi * p.U_bar * p.f < 0.0;
    EXPECT_EQ(e.lambda_plus > 0.0, criterion);
  }
}

TEST(SpectrumSummaryOp, FlagshipSummary) {
  const SpectrumSummary s = spectrum_summary(kstest::flagship(2), 8);
  ASSERT_EQ(s.unstable.size(), 2u);
  const std::set<std::pair<int, int>> uns{{s.unstable[0].q[0], s.unstable[0].q[1]},
                                          {s.unstable[1].q[0], s.unstable[1].q[1]}};
  EXPECT_TRUE(uns.count({1, 0}) == 1 && uns.count({0, 1}) == 1);
  EXPECT_NEAR(s.lambda_max, 0.3027756377319946, 1e-13);
  EXPECT_EQ(s.omega_max.size(), 2u);
  // next-largest eigenvalue is exactly 0 (q = 0 and q^2 = 2), so nu = lambda_max
  EXPECT_NEAR(s.nu, s.lambda_max, 1e-13);
  EXPECT_TRUE(s.is_dominant(mode2d(1, 0)));
  EXPECT_TRUE(s.is_dominant(mode2d(0, 1)));
  EXPECT_FALSE(s.is_dominant(mode2d(1, 1)));
}

TEST(SpectrumSummaryOp, StableParams) {
  const SpectrumSummary s = spectrum_summary(kstest::stable_params(2), 8);
  EXPECT_TRUE(s.unstable.empty());
  EXPECT_LE(s.lambda_max, 0.0);
  EXPECT_GT(s.nu, 0.0);
}

TEST(SpectrumSummaryOp, SubLatticeInstabilityWindowHasNoGrowingMode) {
  // 0 < q_c^2 < 1: the criterion interval is non-empty but contains no
  // integer lattice mode, so the discrete spectrum has nothing growing.
  ModelParams p = kstest::flagship(2);
  p.U_bar = 1.5;  // q_c^2 = 0.5
  ASSERT_TRUE(critical_wavenumber_squared(p).has_value());
  const SpectrumSummary s = spectrum_summary(p, 8);
  EXPECT_TRUE(s.unstable.empty());
  EXPECT_EQ(s.lambda_max, 0.0);  // attained at q = 0
}

TEST(SpectrumSummaryOp, TruncationTooSmall) {
  EXPECT_THROW(spectrum_summary(kstest::flagship(2), 1), TruncationTooSmall);
  EXPECT_NO_THROW(spectrum_summary(kstest::flagship(2), 2));
}

TEST(SpectrumSummaryOp, UnstableContainedInCriterionBall) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelParams p = kstest::random_unstable_params(rng, 2);
    const double q2c = *critical_wavenumber_squared(p);
    const int N = std::max(2, static_cast<int>(std::ceil(std::sqrt(q2c))));
    if (N > 40) continue;  // keep the scan cheap
    const SpectrumSummary s = spectrum_summary(p, N);
    for (const ModeIndex& m : s.unstable) EXPECT_LT(m.q_squared(), q2c);

    // at most two distinct q^2 values attain the maximum
    std::set<int> q2vals;
    for (const ModeIndex& m : s.omega_max) q2vals.insert(m.q_squared());
    EXPECT_LE(q2vals.size(), 2u);
  }
}

TEST(GrowthConstant, DominantModeRatioIsOne) {
  const ModelParams p = kstest::flagship(2);
  const SpectrumSummary s = spectrum_summary(p, 8);
  const ModeIndex q0 = s.omega_max.front();
  const EigenPair e = s.pair(q0);

  // a pure dominant eigen-solution keeps ||e^{Lt} w|| e^{-lambda_max t} == 1
  SpectralField w(2, 8);
  w.u[w.flat(q0)] = e.r_plus.u;
  w.v[w.flat(q0)] = e.r_plus.v;
  const double n0 = l2_norm(w);
  for (double t : {0.0, 0.5, 1.7, 4.0}) {
    const Mat2 E = mode_exponential(p, e, t);
    double x = w.u[w.flat(q0)], y = w.v[w.flat(q0)];
    E.apply(x, y);
    SpectralField wt(2, 8);
    wt.u[wt.flat(q0)] = x;
    wt.v[wt.flat(q0)] = y;
    EXPECT_NEAR(l2_norm(wt) * std::exp(-s.lambda_max * t) / n0, 1.0, 1e-9);
  }
}

TEST(GrowthConstant, StableModeDecays) {
  const ModelParams p = kstest::flagship(2);
  const SpectrumSummary s = spectrum_summary(p, 8);
  const EigenPair e = s.pair(mode2d(3, 0));  // q^2 = 9 > q_c^2
  ASSERT_LT(e.lambda_plus, 0.0);
  double prev = 1e300;
  for (double t : {0.5, 1.0, 2.0}) {
    const double norm = spectral_norm(mode_exponential(p, e, t));
    EXPECT_LT(norm, prev);
    prev = norm;
  }
}

TEST(GrowthConstant, EstimateIsFiniteAndAtLeastOne) {
  const double c1 = growth_constant_estimate(kstest::flagship(2), 8, 25);
  EXPECT_TRUE(std::isfinite(c1));
  EXPECT_GE(c1, 1.0 - 1e-9);
  EXPECT_LT(c1, 50.0);
}
