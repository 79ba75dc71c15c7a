#include "dot/divergence.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dot/rng.hpp"
#include "oracles.hpp"

using dot::DivergenceSpec;

namespace {

std::vector<DivergenceSpec> all_kinds() {
  return {DivergenceSpec::entropic(), DivergenceSpec::alpha(2.0), DivergenceSpec::alpha(1.5),
          DivergenceSpec::alpha(1.25), DivergenceSpec::poly_dual(2), DivergenceSpec::poly_dual(3)};
}

}  // namespace

TEST(Divergence, PhiAtOneIsZeroExactly) {
  for (const auto& d : all_kinds()) EXPECT_EQ(d.phi(1.0), 0.0) << d.name();
}

TEST(Divergence, PhiKnownValues) {
  EXPECT_EQ(DivergenceSpec::entropic().phi(1.0), 0.0);
  // (x^2 - 2(x-1) - 1)/2 at x = 3
  EXPECT_NEAR(DivergenceSpec::alpha(2.0).phi(3.0), 2.0, 1e-15);
}

TEST(Divergence, PhiRejectsNegative) {
  EXPECT_THROW(DivergenceSpec::entropic().phi(-0.5), std::domain_error);
  EXPECT_THROW(DivergenceSpec::alpha(1.5).phi(-1e-9), std::domain_error);
}

TEST(Divergence, PhiMatchesNumericBiconjugate) {
  // phi(2) for alpha(1.5) recovered as sup_y (2y - psi(y)) on a grid
  const auto d = DivergenceSpec::alpha(1.5);
  auto psi = [&](double y) { return d.psi(y); };
  double best = -1e300;
  for (int k = -40000; k <= 40000; ++k) {
    const double y = k / 1000.0;
    best = std::max(best, 2.0 * y - psi(y));
  }
  EXPECT_NEAR(d.phi(2.0), best, 1e-6);
}

TEST(Divergence, PsiKnownValues) {
  const auto ent = DivergenceSpec::entropic();
  EXPECT_NEAR(ent.psi(1.0), 1.0, 1e-15);
  EXPECT_NEAR(ent.psi_prime(1.0), 1.0, 1e-15);
  EXPECT_EQ(DivergenceSpec::alpha(2.0).psi_prime(-2.0), 0.0);
  // alpha(2): psi(y) = ((1+y)_+^2 - 1)/2
  EXPECT_NEAR(DivergenceSpec::alpha(2.0).psi(0.5), (1.5 * 1.5 - 1.0) / 2.0, 1e-15);
}

TEST(Divergence, PsiMatchesBruteForceAtPoint) {
  const auto d = DivergenceSpec::alpha(1.5);
  auto phi = [&](double x) { return d.phi(x); };
  EXPECT_NEAR(d.psi(0.7), oracles::brute_force_conjugate(phi, 0.7, 100.0), 1e-6);
}

TEST(Divergence, ConjugacyOnGrid) {
  for (const auto& d : all_kinds()) {
    auto phi = [&](double x) { return d.phi(x); };
    double worst = 0.0;
    for (int k = -50; k <= 50; ++k) {
      const double y = k / 10.0;
      worst = std::max(worst, std::abs(d.psi(y) - oracles::brute_force_conjugate(phi, y)));
    }
    EXPECT_LE(worst, 1e-6) << d.name();
  }
}

TEST(Divergence, PsiPrimeMonotone) {
  dot::Rng rng(7);
  for (const auto& d : all_kinds()) {
    for (int t = 0; t < 500; ++t) {
      double y1 = rng.uniform(-20.0, 20.0);
      double y2 = rng.uniform(-20.0, 20.0);
      if (y1 > y2) std::swap(y1, y2);
      EXPECT_LE(d.psi_prime(y1), d.psi_prime(y2) + 1e-15) << d.name();
    }
  }
}

TEST(Divergence, FenchelYoung) {
  dot::Rng rng(11);
  for (const auto& d : all_kinds()) {
    for (int t = 0; t < 500; ++t) {
      const double x = rng.uniform(0.0, 10.0);
      const double y = rng.uniform(-5.0, 5.0);
      EXPECT_LE(x * y, d.phi(x) + d.psi(y) + 1e-12) << d.name();
      const double xs = d.psi_prime(y);
      EXPECT_NEAR(xs * y, d.phi(xs) + d.psi(y), 1e-9) << d.name();
    }
  }
}

TEST(Divergence, ConvexityParams) {
  auto [l1e, l2e] = DivergenceSpec::entropic().convexity_params();
  EXPECT_EQ(l1e, 0.0);
  EXPECT_EQ(l2e, 1.0);
  auto [l1a, l2a] = DivergenceSpec::alpha(2.0).convexity_params();
  EXPECT_EQ(l1a, 1.0);
  EXPECT_EQ(l2a, 0.0);
  auto [l1b, l2b] = DivergenceSpec::alpha(1.5).convexity_params();
  EXPECT_NEAR(l1b, 0.5, 1e-15);
  EXPECT_NEAR(l2b, 0.5, 1e-15);
  EXPECT_THROW(DivergenceSpec::poly_dual(3).convexity_params(), dot::config_error);
  // poly_dual(2) has constant phi'' = 1/2
  auto [l1p, l2p] = DivergenceSpec::poly_dual(2).convexity_params();
  EXPECT_EQ(l1p, 2.0);
  EXPECT_EQ(l2p, 0.0);
}

TEST(Divergence, ConvexityCertificateOnLogGrid) {
  for (const auto& d : all_kinds()) {
    if (!d.has_convexity_certificate()) continue;
    auto [l1, l2] = d.convexity_params();
    for (int k = -60; k <= 60; ++k) {
      const double x = std::pow(10.0, k / 10.0);
      // the 4e-15 relative term absorbs the double rounding of 1/(1/x)
      EXPECT_LE(1.0 / d.phi_second(x), (l1 + l2 * x) * (1.0 + 4e-15) + 1e-12)
          << d.name() << " x=" << x;
    }
  }
}

TEST(Divergence, DualRegularityAnchor) {
  for (const auto& d : all_kinds()) {
    EXPECT_NEAR(d.psi_prime(d.x0()), 1.0, 1e-12) << d.name();
    EXPECT_GT(d.delta(), 0.0) << d.name();
    // strict convexity of psi on [x0 - delta, inf): psi'' > 0 there
    for (int k = 0; k <= 100; ++k) {
      const double y = d.x0() - d.delta() + k * 0.1;
      EXPECT_GT(d.psi_second(y), 0.0) << d.name() << " y=" << y;
    }
  }
}

TEST(Divergence, PolyDualEpsilonParameterization) {
  const auto d = DivergenceSpec::poly_dual(2);
  // conjugate of eps*phi has derivative psi'(y/eps); matches (y_+)^b scaling
  for (double eps : {0.1, 1.0, 10.0}) {
    for (double y : {-1.0, 0.3, 2.5}) {
      EXPECT_NEAR(d.poly_dual_eps_psi_prime(eps, y), d.psi_prime(y / eps), 1e-12);
    }
  }
  EXPECT_THROW(DivergenceSpec::entropic().poly_dual_eps_psi_prime(1.0, 1.0), dot::config_error);
}

TEST(Divergence, InvalidParameters) {
  EXPECT_THROW(DivergenceSpec::alpha(1.0), dot::config_error);
  EXPECT_THROW(DivergenceSpec::alpha(2.5), dot::config_error);
  EXPECT_THROW(DivergenceSpec::poly_dual(1), dot::config_error);
}
