#include <gtest/gtest.h>

#include "biofilm/verify.hpp"

using namespace biofilm;

TEST(CheckReport, Relations) {
  CheckReport r;
  r.measure("a", 1.0, 1.05, 0.1, Relation::AbsClose, Provenance::Oracle);
  r.measure("b", 2.0, 2.1, 0.01, Relation::RelClose, Provenance::ClosedForm);
  EXPECT_TRUE(r.find("a")->pass);
  EXPECT_FALSE(r.find("b")->pass);
  EXPECT_FALSE(r.pass);
  CheckReport s;
  s.measure("c", 1.0, 2.0, 0.0, Relation::AtMost, Provenance::Exact);
  s.measure("d", 3.0, 2.0, 0.0, Relation::AtLeast, Provenance::Qualitative);
  s.require_zero("e", 0);
  EXPECT_TRUE(s.pass);
  s.measure("nan", std::nan(""), 0.0, 1.0, Relation::AtMost, Provenance::Oracle);
  EXPECT_FALSE(s.pass);
  EXPECT_NE(s.text().find("FAIL nan"), std::string::npos);
  EXPECT_THROW(s.value("missing"), Error);
}

TEST(CheckHelpers, SignChangesAndReversals) {
  EXPECT_EQ(detail::count_sign_changes({3, 2, 0.5, 0.9, 1.1, 1.0}, 1.0, 1e-12), 2);
  EXPECT_EQ(detail::count_sign_changes({3, 2, 1.0 + 1e-14, 1.0}, 1.0, 1e-12), 0);
  EXPECT_EQ(detail::count_reversals({1, 2, 3, 2, 2, 3}, 0.0), 2);
  EXPECT_EQ(detail::count_reversals({1, 2, 3, 3 - 1e-13, 3}, 1e-12), 0);
}

TEST(Checks, SmallHeightLimit) {
  const auto r = check_small_h_limit(figure1_model());
  EXPECT_TRUE(r.pass) << r.text();
  Model lin = figure1_model();
  lin.rate = RateModel::linear(1.0);
  const auto rl = check_small_h_limit(lin);
  EXPECT_TRUE(rl.pass) << rl.text();
  EXPECT_NE(rl.find("linear_flux_ratio_closed_form"), nullptr);
}

TEST(Checks, LargeHeightLimit) {
  const auto r = check_large_h_limit(figure1_model());
  EXPECT_TRUE(r.pass) << r.text();
  EXPECT_LE(r.value("u0_at_max_h"), 1e-6);
  Model lin = figure1_model();
  lin.rate = RateModel::linear(1.0);
  const auto rl = check_large_h_limit(lin);
  EXPECT_TRUE(rl.pass) << rl.text();
}

TEST(Checks, LargeHeightNeedsStrictlyMonotoneRate) {
  Model m = figure1_model();
  m.rate = RateModel::tabulated({0.0, 0.5, 1.0}, {0.0, 1.0, 1.0});
  EXPECT_THROW(check_large_h_limit(m), DomainError);
}

TEST(Checks, GradientEnvelopeFormula) {
  const Model m = figure1_model();
  // amp sinh(k h y)/sinh(k h) with k = 1, h = 2, amp = 0.5
  const double y = 0.3;
  EXPECT_NEAR(gradient_envelope(y, 2.0, 0.5, m, 1.0), 0.5 * std::sinh(0.6) / std::sinh(2.0), 1e-15);
  EXPECT_EQ(gradient_envelope(0.0, 2.0, 0.5, m, 1.0), 0.0);
  EXPECT_TRUE(std::isfinite(gradient_envelope(0.5, 1e4, 0.5, m, 1.0)));
}

TEST(Checks, Extinction) {
  Model m = figure1_model();
  m.growth = GrowthModel::affine(1.0, 2.0);
  const auto r = check_extinction(m);
  EXPECT_TRUE(r.pass) << r.text();
  EXPECT_THROW(check_extinction(figure1_model()), DomainError);
}

TEST(Checks, ConvergenceToEquilibrium) {
  const auto r = check_convergence_to_equilibrium(figure1_model());
  EXPECT_TRUE(r.pass) << r.text();
  Model m = figure1_model();
  m.growth = GrowthModel::affine(1.0, 2.0);
  EXPECT_THROW(check_convergence_to_equilibrium(m), DomainError);
}

TEST(Checks, Figure1OscillatesWithSlowFilmDiffusion) {
  Model m = figure1_model();
  m.params.kappa = 0.1;
  Figure1Options o;
  o.t_end = 100.0;
  o.evolution.output_interval = 0.05;
  const auto r = check_figure1(m, o);
  EXPECT_TRUE(r.pass) << r.text();
  EXPECT_GE(r.value("sign_changes"), 2.0);
}

TEST(Checks, RunChecksReportsUnknownAndErrors) {
  EXPECT_THROW(run_checks({"nope"}), InvalidInput);
  const auto reps = run_checks({"small_h", "extinction"}, [](const std::string &) { return figure1_model(); });
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_TRUE(reps[0].pass);
  EXPECT_FALSE(reps[1].pass); // figure1 model is not in the extinction regime
  ASSERT_FALSE(reps[1].notes.empty());
  EXPECT_NE(reps[1].notes[0].find("error"), std::string::npos);
}
