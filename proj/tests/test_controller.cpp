#include <gtest/gtest.h>

#include "qisim/controller.hpp"
#include "warning_capture.hpp"

#include <random>

using namespace qisim;

TEST(Schedule, EpsilonFromCycles) {
  EXPECT_NEAR(epsilon_for_cycles(42, 0.002, 20.0), 0.034735258944738560, 1e-16);
  EXPECT_EQ(cycles_for_epsilon(0.034735258944738560 * 1.000001, 0.002, 20.0), 42);
  EXPECT_EQ(cycles_for_epsilon(1.0 - 1e-12, 0.002, 20.0), 1);
  EXPECT_THROW(cycles_for_epsilon(0.0, 0.002, 20.0), std::invalid_argument);
  EXPECT_THROW(epsilon_for_cycles(0, 0.002, 20.0), std::invalid_argument);
}

TEST(Schedule, BuildFromEitherChoice) {
  ScenarioParams p;
  const auto s = build_schedule(p);
  EXPECT_EQ(s.K, 42);
  EXPECT_NEAR(s.epsilon, 0.0347352589447, 1e-12);
  p.cycles.reset();
  p.epsilon = 0.05;
  const auto s2 = build_schedule(p);
  EXPECT_EQ(s2.K, cycles_for_epsilon(0.05, p.eta, p.N_B));
  EXPECT_EQ(static_cast<long>(s2.lambdas.size()), s2.K);
}

TEST(Schedule, LambdaConsistency) {
  ScenarioParams p;
  const auto s = build_schedule(p);
  for (long k = 0; k < s.K; ++k)
    EXPECT_NEAR(s.lambdas[k], std::sqrt(p.eta) * csi_trajectory(p, Hypothesis::Present, k), 1e-20);
}

TEST(Schedule, ThermalTotal) {
  ScenarioParams p;
  const auto s = build_schedule(p);
  EXPECT_NEAR(s.N_T_therm, 1.68e-4, 1e-17);
  EXPECT_NEAR(-p.N_S * std::log(s.epsilon) / 2.0, 1.68e-4, 1e-15);
}

TEST(Schedule, CoherentTotalIdentity) {
  ScenarioParams p;
  const auto s = build_schedule(p);
  const double cp = phase_sensitive_cross_correlation(p);
  const double q = 1.0 - p.eta * (1.0 + p.N_B);
  // exact geometric sum
  const double exact = 2.0 * p.modes * p.eta * cp * cp * (1.0 - std::pow(q, 2.0 * s.K)) / (1.0 - q * q);
  EXPECT_NEAR(s.N_T_coh / exact, 1.0, 1e-12);
  // continuum form M C_p^2 (1 - eps)/(1 + N_B); the discrete sum sits about
  // 3% above it at these parameters
  const double continuum = p.modes * cp * cp * (1.0 - s.epsilon) / (1.0 + p.N_B);
  EXPECT_NEAR(s.N_T_coh / continuum, 1.0, 0.035);
  EXPECT_NEAR(asymptotic_coherent_total(p, s.epsilon) / continuum, 1.0, 0.05);
}

TEST(SigmaFactor, KnownValueAndMonotone) {
  ScenarioParams p;
  auto s = build_schedule(p);
  p.modes = 1.0 / (s.lambdas[0] * s.lambdas[0]);
  s = build_schedule(p);
  EXPECT_NEAR(sigma_factor(s, 0), 1.257766554997121, 1e-13);
  EXPECT_NEAR(squeeze_param(0, Hypothesis::Absent, s) / s.lambdas[0], -0.128883277498560623, 1e-13);
  p.modes = 1e8;
  s = build_schedule(p);
  for (long k = 1; k < s.K; ++k) EXPECT_LT(sigma_factor(s, k), sigma_factor(s, k - 1));
  EXPECT_GT(sigma_factor(s, s.K - 1), 1.0);
  EXPECT_THROW(sigma_factor(s, s.K), std::out_of_range);
}

TEST(SqueezeParam, Limits) {
  ScenarioParams p;
  p.modes = 1e12;  // sigma -> 1
  const auto s = build_schedule(p);
  for (long k : {5L, 20L}) {
    EXPECT_NEAR(squeeze_param(k, Hypothesis::Absent, s), 0.0, 1e-9 * s.lambdas[k]);
    EXPECT_NEAR(squeeze_param(k, Hypothesis::Present, s), s.lambdas[k], 1e-9 * s.lambdas[k]);
  }
  EXPECT_GT(squeeze_param(0, Hypothesis::Present, s), 0.0);
}

TEST(SqueezeParam, ClampsWhenSigmaDiverges) {
  ScenarioParams p;
  p.modes = 1e-3;
  const auto s = build_schedule(p);
  WarningCapture w;
  const double r = squeeze_param(0, Hypothesis::Present, s);
  EXPECT_NEAR(r, 1e3 * s.lambdas[0], 1e-18);
  EXPECT_FALSE(w.messages.empty());
}

TEST(BayesUpdate, EqualLikelihoodKeepsPrior) {
  auto b = BeliefState::from_prior(0.3);
  const auto post = bayes_update(b, -2.0, -2.0);
  EXPECT_NEAR(post.p1, 0.3, 1e-15);
  EXPECT_EQ(post.k, 1);
  EXPECT_EQ(post.h_tilde, Hypothesis::Absent);
}

TEST(BayesUpdate, HandComputedRatio) {
  auto b = BeliefState::from_prior(0.5);
  const auto post = bayes_update(b, std::log(0.2), std::log(0.6));
  EXPECT_NEAR(post.p1, 0.75, 1e-15);
  EXPECT_NEAR(post.p0 + post.p1, 1.0, 1e-12);
  EXPECT_EQ(post.h_tilde, Hypothesis::Present);
}

TEST(BayesUpdate, AbsorbingAndExtreme) {
  BeliefState b;
  b.p0 = 1.0;
  b.p1 = 0.0;
  const auto post = bayes_update(b, -50.0, -1.0);
  EXPECT_EQ(post.p0, 1.0);
  EXPECT_EQ(post.p1, 0.0);
  const auto extreme = bayes_update(BeliefState{}, -1e6, 0.0);
  EXPECT_NEAR(extreme.p0 + extreme.p1, 1.0, 1e-12);
  EXPECT_GT(extreme.p1, 0.99);
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_THROW(bayes_update(BeliefState{}, ninf, ninf), std::domain_error);
  EXPECT_EQ(bayes_update(BeliefState{}, ninf, -3.0).p1, 1.0);
}

TEST(BayesUpdate, TieKeepsPreviousDecision) {
  BeliefState b;
  b.h_tilde = Hypothesis::Present;
  EXPECT_EQ(bayes_update(b, -1.0, -1.0).h_tilde, Hypothesis::Present);
}

TEST(TentativeDecision, ArgmaxAndSeededTieBreak) {
  BeliefState b;
  b.p0 = 0.4;
  b.p1 = 0.6;
  std::mt19937_64 rng(1);
  EXPECT_EQ(tentative_decision(b, rng), Hypothesis::Present);
  BeliefState tie;
  std::mt19937_64 r1(99), r2(99);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(tentative_decision(tie, r1), tentative_decision(tie, r2));
  int ones = 0;
  std::mt19937_64 r3(7);
  for (int i = 0; i < 2000; ++i) ones += to_int(tentative_decision(tie, r3));
  EXPECT_GT(ones, 850);
  EXPECT_LT(ones, 1150);
}
