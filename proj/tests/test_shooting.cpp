#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "biofilm/bvp.hpp"
#include "biofilm/shooting.hpp"
#include "oracles.hpp"

using namespace biofilm;

namespace {

Model tanh_model(double b = 0.5) {
  Model m;
  m.rate = RateModel::tanh(2.0);
  m.growth = GrowthModel::affine(1.0, b);
  return m;
}

Model linear_model(double b = 0.25) {
  Model m;
  m.rate = RateModel::linear(1.0);
  m.growth = GrowthModel::affine(1.0, b);
  return m;
}

} // namespace

TEST(Shoot, ZeroDataStaysZeroAndSensitivityIsCosh) {
  const Model m = tanh_model();
  std::vector<double> z;
  for (int i = 0; i <= 20; ++i) z.push_back(0.1 * i);
  const auto s = shoot_on_grid(0.0, z, m);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_EQ(s.c[i], 0.0);
    EXPECT_EQ(s.c_z[i], 0.0);
    const double k = std::sqrt(2.0);
    EXPECT_NEAR(s.w[i], std::cosh(k * z[i]), 1e-10 * std::cosh(k * z[i]));
    EXPECT_NEAR(s.w_z[i], k * std::sinh(k * z[i]), 1e-10 * std::cosh(k * z[i]));
  }
}

TEST(Shoot, LinearClosedForm) {
  const Model m = linear_model();
  std::vector<double> z;
  // 0.3 cosh(1.8) < c*, so the truncation of r is inactive.
  for (int i = 0; i <= 18; ++i) z.push_back(0.1 * i);
  const double c0 = 0.3;
  const auto s = shoot_on_grid(c0, z, m);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_NEAR(s.c[i], c0 * std::cosh(z[i]), 1e-11);
    EXPECT_NEAR(s.c_z[i], c0 * std::sinh(z[i]), 1e-11);
    EXPECT_NEAR(s.w[i], std::cosh(z[i]), 1e-10);
  }
  EXPECT_EQ(check_shoot_invariants(s).violations, 0);
}

TEST(Shoot, SensitivityMatchesFiniteDifference) {
  const Model m = tanh_model();
  for (double c0 : {0.05, 0.12, 0.2, 0.25, 0.5}) {
    const double d = 1e-5 * std::max(c0, 1.0);
    for (double zz : {0.3, 1.0}) {
      const std::vector<double> z{0.0, zz};
      const auto mid = shoot_on_grid(c0, z, m);
      const auto hi = shoot_on_grid(c0 + d, z, m);
      const auto lo = shoot_on_grid(c0 - d, z, m);
      const double fd = (hi.c[1] - lo.c[1]) / (2 * d);
      EXPECT_NEAR(mid.w[1], fd, 1e-6 * std::abs(fd)) << "c0 = " << c0 << ", z = " << zz;
    }
  }
}

TEST(ContactHeight, ZeroDataExact) {
  for (double b : {0.25, 0.5, 1.0}) {
    const Model m = tanh_model(b);
    EXPECT_NEAR(contact_height(0.0, m), 1.0 / b, 1e-13 / b);
  }
}

TEST(ContactHeight, LinearOracle) {
  const Model m = linear_model();
  const double h = oracle::bisect([](double x) { return 0.5 * std::cosh(x) + 0.25 * x - 1.0; }, 0.0, 4.0);
  EXPECT_NEAR(contact_height(0.5, m), h, 1e-12);
}

TEST(ContactHeight, VanishesAsDataApproachesBulk) {
  const Model m = tanh_model();
  double prev = std::numeric_limits<double>::infinity();
  for (double c0 : {0.9, 0.99, 0.999, 0.9999}) {
    const double h = contact_height(c0, m);
    EXPECT_LT(h, prev);
    prev = h;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(ContactHeight, DerivativeIdentity) {
  // (L b/kappa_L + c_z(h)) h'(c0) = -w(h)
  const Model m = tanh_model();
  for (double c0 : {0.05, 0.15, 0.25}) {
    const auto pt = contact_point(c0, m);
    const double d = 1e-5;
    const double fd = (contact_height(c0 + d, m) - contact_height(c0 - d, m)) / (2 * d);
    const double identity = -pt.w / (0.5 + pt.c_z);
    EXPECT_NEAR(fd, identity, 1e-6 * std::abs(identity)) << "c0 = " << c0;
  }
}

TEST(EquilibriumResidual, ZeroDataExact) {
  const Model m = tanh_model();
  EXPECT_NEAR(equilibrium_residual(0.0, m), -1.0, 1e-13);
}

TEST(EquilibriumResidual, LinearOracle) {
  const Model m = linear_model();
  const double c0 = 0.5;
  const double h = oracle::bisect([](double x) { return 0.5 * std::cosh(x) + 0.25 * x - 1.0; }, 0.0, 4.0);
  EXPECT_NEAR(equilibrium_residual(c0, m), c0 * std::sinh(h) - 0.25 * h, 1e-11);
}

TEST(EquilibriumResidual, PositiveAtSubsistence) {
  const Model m = tanh_model();
  const double c_low = subsistence_concentration(m);
  EXPECT_NEAR(m.r(c_low), 0.5, 1e-13);
  EXPECT_GT(equilibrium_residual(c_low, m), 0.0);
  EXPECT_THROW(equilibrium_residual(0.1, tanh_model(2.5)), DomainError);
}

TEST(Certificate, ValueAtOrigin) {
  const Model m = tanh_model();
  for (double c0 : {0.0, 0.1, 0.2}) {
    const ShootPoint pt{0.0, c0, 0.0, 1.0, 0.0};
    EXPECT_NEAR(certificate_function(pt, m), -(m.r(c0) - 0.5), 1e-15);
    EXPECT_GE(certificate_function(pt, m), 0.0);
  }
}

TEST(Certificate, SlopeAtOriginForZeroData) {
  const Model m = tanh_model();
  const double dz = 1e-4;
  const auto s = shoot_on_grid(0.0, std::vector<double>{0.0, dz, 2 * dz}, m);
  auto M = [&](std::size_t i) { return certificate_function({s.z[i], s.c[i], s.c_z[i], s.w[i], s.w_z[i]}, m); };
  const double slope = (-3 * M(0) + 4 * M(1) - M(2)) / (2 * dz);
  EXPECT_NEAR(slope, 0.5 * 2.0, 1e-6); // L b r'(0)/(kappa_L kappa)
}

TEST(Certificate, LinearClosedFormPositive) {
  // c = c0 cosh z, w = cosh z: M = (b + c0 sinh z) sinh z - (c0 cosh z - b) cosh z.
  const Model m = linear_model();
  for (double c0 : {0.0, 0.1, 0.2}) {
    const auto s = shoot_on_grid(c0, std::vector<double>{0.0, 0.5, 1.0, 2.0}, m);
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      const double z = s.z[i];
      const double exact = (0.25 + c0 * std::sinh(z)) * std::sinh(z) - (c0 * std::cosh(z) - 0.25) * std::cosh(z);
      const double got = certificate_function({z, s.c[i], s.c_z[i], s.w[i], s.w_z[i]}, m);
      EXPECT_NEAR(got, exact, 1e-10);
      EXPECT_GT(got, 0.0);
    }
  }
}

TEST(Certificate, TanhModelIsUnique) {
  const auto cert = monotonicity_certificate(tanh_model());
  EXPECT_TRUE(cert.unique) << cert.offending;
  EXPECT_EQ(cert.c0.size(), 64u);
  EXPECT_GT(cert.min_B_increment, 0.0);
  EXPECT_GT(cert.min_M_overall, 0.0);
  EXPECT_EQ(cert.shoot_violations, 0);
}

TEST(Equilibrium, LinearTranscendentalOracle) {
  const oracle::LinearEquilibrium ex(0.25);
  const auto eq = find_equilibrium_shooting(linear_model());
  ASSERT_EQ(eq.status, EquilibriumStatus::Found);
  EXPECT_NEAR(eq.h_e, ex.h, 1e-8 * ex.h);
  EXPECT_NEAR(eq.c0_e, ex.c0, 1e-8);
  EXPECT_NEAR(eq.residual_A, 0.0, 1e-12);
  EXPECT_NEAR(eq.residual_B, 0.0, 1e-12);
  EXPECT_TRUE(eq.unique);
}

TEST(Equilibrium, BoundaryConditionsAtContact) {
  const Model m = tanh_model();
  const auto eq = find_equilibrium_shooting(m);
  ASSERT_EQ(eq.status, EquilibriumStatus::Found);
  const auto &s = eq.profile;
  EXPECT_NEAR(s.c.back(), 1.0 - 0.5 * eq.h_e, 1e-11);
  EXPECT_NEAR(s.c_z.back(), 0.5 * eq.h_e, 1e-11);
  EXPECT_GT(eq.c0_e, 0.0);
  EXPECT_LT(eq.c0_e, subsistence_concentration(m));
}

TEST(Equilibrium, ProfileSatisfiesFixedPointMap) {
  const Model m = tanh_model();
  const auto eq = find_equilibrium_shooting(m);
  auto defect = [&](int n) { return fixed_point_defect(equilibrium_profile_on_grid(eq, m, n), eq.h_e, m); };
  const double d1 = defect(1024), d2 = defect(2048);
  EXPECT_NEAR(d1 / d2, 4.0, 0.8); // the defect is the quadrature error of the map
  EXPECT_LE(defect(8192), 1e-8);
}

TEST(Equilibrium, NoneWhenRateBelowSubsistence) {
  const auto eq = find_equilibrium_shooting(tanh_model(2.0));
  EXPECT_EQ(eq.status, EquilibriumStatus::NoEquilibrium);
}
