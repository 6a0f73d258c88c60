#include <gtest/gtest.h>

#include "qisim/controller.hpp"
#include "qisim/counts.hpp"

#include <map>
#include <random>

using namespace qisim;

namespace {

// Direct finite sum for the Laguerre law, long double.
long double laguerre_direct(long n, long double x, long double nb) {
  const long double z = x / (nb * (1 + nb));
  long double sum = 0, term = 1;  // C(n,j) z^j / j!
  for (long j = 0; j <= n; ++j) {
    sum += term;
    term *= static_cast<long double>(n - j) / ((j + 1) * static_cast<long double>(j + 1)) * z;
  }
  return std::pow(nb / (1 + nb), static_cast<long double>(n)) / (1 + nb) * std::exp(-x / (1 + nb)) * sum;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(LaguerrePmf, ArbitraryPrecisionValues) {
  EXPECT_LT(rel(p_b_pmf(0, 1.6, 4e-6), 0.20189700254332667), 1e-13);
  EXPECT_LT(rel(p_b_pmf(1, 1.6, 4e-6), 0.32303342738797558), 1e-13);
  EXPECT_LT(rel(p_b_pmf(3, 1.6, 4e-6), 0.13782814699350703), 1e-13);
  EXPECT_LT(rel(p_b_pmf(5, 0.5, 2.0), 0.053965394344103238), 1e-13);
  EXPECT_LT(rel(p_b_pmf(120, 100.0, 10.0), 0.0076341840957289304), 1e-11);
  EXPECT_LT(rel(p_b_pmf(7, 0.064, 1e-12), 8.1852968624625381e-13), 1e-10);
}

TEST(LaguerrePmf, MatchesDirectSum) {
  for (double nb : {0.01, 0.3, 2.0})
    for (double x : {0.0, 0.2, 3.0})
      for (long n = 0; n < 25; ++n)
        EXPECT_LT(rel(p_b_pmf(n, x, nb), static_cast<double>(laguerre_direct(n, x, nb))), 1e-12)
            << n << " " << x << " " << nb;
}

TEST(LaguerrePmf, ThermalLimit) {
  const double nb = 0.7;
  for (long n = 0; n < 10; ++n) EXPECT_LT(rel(p_b_pmf(n, 0.0, nb), std::pow(nb, n) / std::pow(1 + nb, n + 1)), 1e-14);
}

TEST(LaguerrePmf, PoissonLimit) {
  const double x = 2.5;
  double pois = std::exp(-x);
  for (long n = 0; n < 15; ++n) {
    EXPECT_LT(rel(p_b_pmf(n, x, 1e-12), pois), 1e-6);
    pois *= x / (n + 1);
  }
  EXPECT_DOUBLE_EQ(p_b_pmf(3, 2.0, 0.0), std::exp(-2.0) * 8.0 / 6.0);
  EXPECT_EQ(p_b_pmf(2, 0.0, 0.0), 0.0);
}

TEST(LaguerrePmf, NormalisedWithMean) {
  for (auto [x, nb] : {std::pair{1.6, 4e-6}, {0.0, 3.0}, {50.0, 0.1}, {1e-3, 1.68e-4}}) {
    double s = 0, m = 0;
    for (long n = 0; n < 2000; ++n) {
      const double p = p_b_pmf(n, x, nb);
      s += p;
      m += n * p;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_LT(rel(m, x + nb), 1e-10);
  }
}

TEST(LaguerrePmf, NonNegativeOverWideRange) {
  for (double x : {1e-3, 1.0, 100.0, 1000.0})
    for (double nb : {1e-9, 1e-3, 1.0, 50.0})
      for (long n : {0L, 1L, 10L, 1000L, 10000L}) {
        const double lp = log_p_b_pmf(n, x, nb);
        EXPECT_FALSE(std::isnan(lp));
        EXPECT_LE(lp, 1e-12);
      }
  EXPECT_THROW(p_b_pmf(-1, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(p_b_pmf(1, -1.0, 1.0), std::invalid_argument);
}

TEST(NegBinomialPmf, Values) {
  EXPECT_LT(rel(p_e_pmf(0, 1e7, 1e-7), 0.36787945956541363), 1e-12);
  EXPECT_LT(rel(p_e_pmf(3, 1e7, 1e-7), 0.06131324326090165), 1e-12);
  EXPECT_LT(rel(p_e_pmf(2, 3.5, 0.4), 0.19800052823189945), 1e-13);
  EXPECT_LT(rel(p_e_pmf(400, 1e5, 0.004), 0.019903192081627982), 1e-9);
  EXPECT_LT(rel(p_e_pmf(0, 50.0, 0.02), std::pow(1.02, -50.0)), 1e-14);
  EXPECT_EQ(p_e_pmf(0, 10.0, 0.0), 1.0);
  EXPECT_EQ(p_e_pmf(1, 10.0, 0.0), 0.0);
}

TEST(NegBinomialPmf, SingleModeIsThermal) {
  for (long n = 0; n < 10; ++n) EXPECT_LT(rel(p_e_pmf(n, 1.0, 0.3), std::pow(0.3, n) / std::pow(1.3, n + 1)), 1e-14);
}

TEST(NegBinomialPmf, NormalisedWithMean) {
  for (auto [M, e] : {std::pair{1e7, 2e-9}, {3.2e7, 5e-8}, {1.0, 0.5}, {1e4, 0.03}}) {
    double s = 0, m = 0;
    for (long n = 0; n < 5000; ++n) {
      const double p = p_e_pmf(n, M, e);
      s += p;
      m += n * p;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_LT(rel(m, M * e), 1e-10);
  }
}

TEST(NegBinomialPmf, BinomialRewriteAtSmallOccupation) {
  // C(M,n) e^n (1-e)^(M-n) agrees up to O(n^2/M + M e^2)
  const double M = 1e8, e = 1e-9;
  for (long n = 0; n < 4; ++n) {
    double lb = n * std::log(e) + (M - n) * std::log1p(-e);
    for (long i = 1; i <= n; ++i) lb += std::log((M - n + i) / i);
    EXPECT_LT(rel(p_e_pmf(n, M, e), std::exp(lb)), 1e-6);
    // the (1+e)^(M-n) form is off by about 2 M e
    const double wrong = lb - (M - n) * std::log1p(-e) + (M - n) * std::log1p(e);
    EXPECT_GT(rel(p_e_pmf(n, M, e), std::exp(wrong)), 0.15);
  }
}

TEST(JointLikelihood, ZeroCountsNoResidual) {
  ScenarioParams p;
  const double nb = p.eta * p.N_B * p.N_S;
  const auto lp = likelihood_params(p, 0, 0.0, Hypothesis::Absent);
  EXPECT_DOUBLE_EQ(joint_log_likelihood({0, 0, 0}, lp), -std::log1p(nb));
  // unmeasured E channel
  CountLikelihoodParams off = lp;
  off.e_channel = false;
  EXPECT_EQ(joint_log_likelihood({0, 1, 0}, off), -std::numeric_limits<double>::infinity());
}

TEST(JointLikelihood, BaselineRatioSingleBPhoton) {
  ScenarioParams p;  // M = 1e7
  const auto s = build_schedule(p);
  const double r = squeeze_param(0, Hypothesis::Absent, s);
  EXPECT_LT(rel(r, -0.00013654338934150644), 1e-12);
  const CountRecord rec{1, 0, 0};
  const double l0 = joint_log_likelihood(rec, likelihood_params(p, 0, r, Hypothesis::Absent));
  const double l1 = joint_log_likelihood(rec, likelihood_params(p, 0, r, Hypothesis::Present));
  EXPECT_NEAR(l1 - l0, 0.28237596746306212, 1e-11);
}

TEST(JointLikelihood, ExclusiveOrRule) {
  ScenarioParams p;
  const auto s = build_schedule(p);
  for (long k : {0L, 7L, 41L})
    for (auto ht : {Hypothesis::Absent, Hypothesis::Present}) {
      const double rk = squeeze_param(k, ht, s);
      for (auto j : {Hypothesis::Absent, Hypothesis::Present}) {
        const Hypothesis x = to_int(ht) == to_int(j) ? Hypothesis::Absent : Hypothesis::Present;
        const double rt = squeeze_param(k, x, s);
        EXPECT_NEAR(std::abs(residual_squeeze(p, j, k, rk)), std::abs(rt), 1e-15 * s.lambdas[0]);
      }
    }
}

TEST(BayesWithCounts, ZeroCountsFavourNulledHypothesis) {
  ScenarioParams p;
  const auto s = build_schedule(p);
  for (auto ht : {Hypothesis::Absent, Hypothesis::Present}) {
    BeliefState b;
    b.h_tilde = ht;
    const double r = squeeze_param(3, ht, s);
    const auto post = bayes_update(b, {0, 0, 3}, likelihood_params(p, 3, r, Hypothesis::Absent),
                                   likelihood_params(p, 3, r, Hypothesis::Present));
    EXPECT_GT(ht == Hypothesis::Present ? post.p1 : post.p0, 0.5);
    EXPECT_NEAR(post.p0 + post.p1, 1.0, 1e-12);
  }
}

TEST(Sampler, ExactNullingGivesNoCounts) {
  ScenarioParams p;
  p.N_B = 1e-300;  // no thermal background
  const auto s = build_schedule(p);
  std::mt19937_64 rng(2);
  const auto tr = sample_trajectory(
      p, s.K, Hypothesis::Present, [&](long k, std::span<const SampledCycle>) { return s.lambdas[k]; }, rng);
  ASSERT_EQ(static_cast<long>(tr.size()), s.K);
  for (const auto& c : tr) {
    EXPECT_EQ(c.counts.N_b, 0);
    EXPECT_EQ(c.counts.N_E, 0);
  }
}

TEST(Sampler, ControllerSeesOnlyPast) {
  ScenarioParams p;
  std::mt19937_64 rng(2);
  sample_trajectory(
      p, 10, Hypothesis::Present,
      [](long k, std::span<const SampledCycle> h) {
        EXPECT_EQ(static_cast<long>(h.size()), k);
        return 0.0;
      },
      rng);
}

TEST(Sampler, CrossCycleCorrelationAndMeans) {
  ScenarioParams p;
  p.modes = 1e9;
  const auto s = build_schedule(p);
  auto ctrl = [&](long k, std::span<const SampledCycle>) { return 0.3 * s.lambdas[k]; };
  const long trials = 20000;
  double m0 = 0, m5 = 0, m00 = 0, m55 = 0, m05 = 0, mb = 0;
  for (long t = 0; t < trials; ++t) {
    std::mt19937_64 rng(1000 + t);
    CountSampler<std::mt19937_64> cs(p, Hypothesis::Present, rng);
    double e0 = 0, e5 = 0;
    for (long k = 0; k <= 5; ++k) {
      const auto rec = cs.draw(k, ctrl(k, {}));
      if (k == 0) {
        e0 = rec.N_E;
        mb += rec.N_b;
      }
      if (k == 5) e5 = rec.N_E;
    }
    m0 += e0;
    m5 += e5;
    m00 += e0 * e0;
    m55 += e5 * e5;
    m05 += e0 * e5;
  }
  m0 /= trials;
  m5 /= trials;
  mb /= trials;
  const double res0 = 0.7 * s.lambdas[0], res5 = 0.7 * s.lambdas[5];
  EXPECT_NEAR(m0 / (p.modes * res0 * res0), 1.0, 0.03);
  EXPECT_NEAR((m5 / m0) / ((res5 * res5) / (res0 * res0)), 1.0, 0.03);
  EXPECT_NEAR(mb / (p.modes * res0 * res0 + p.eta * p.N_B * p.N_S), 1.0, 0.03);
}

TEST(Sampler, ECountsShareOneTotal) {
  // a large constant residual at M = 1 makes the shared total visible:
  // cov(N_E^0, N_E^5) = ratio^2 Var(mu_tot), with no counterpart in
  // independent per-cycle draws
  ScenarioParams p;
  p.modes = 1.0;
  auto ctrl = [](long, std::span<const SampledCycle>) { return -3.0; };
  const long trials = 20000;
  double m0 = 0, m5 = 0, m00 = 0, m55 = 0, m05 = 0;
  for (long t = 0; t < trials; ++t) {
    std::mt19937_64 rng(5000 + t);
    const auto tr = sample_trajectory(p, 6, Hypothesis::Present, ctrl, rng);
    const double e0 = tr[0].counts.N_E, e5 = tr[5].counts.N_E;
    m0 += e0;
    m5 += e5;
    m00 += e0 * e0;
    m55 += e5 * e5;
    m05 += e0 * e5;
  }
  m0 /= trials;
  m5 /= trials;
  const double v0 = m00 / trials - m0 * m0, v5 = m55 / trials - m5 * m5;
  const double corr = (m05 / trials - m0 * m5) / std::sqrt(v0 * v5);
  EXPECT_GT(corr, 0.6);
}

TEST(Sampler, DegenerateAnchorFallsBack) {
  ScenarioParams p;
  const auto s = build_schedule(p);
  std::mt19937_64 rng(4);
  CountSampler<std::mt19937_64> cs(p, Hypothesis::Present, rng);
  cs.draw(0, s.lambdas[0]);  // exact nulling at k = 0
  EXPECT_TRUE(cs.degenerate_anchor());
  long total = 0;
  for (long k = 1; k < s.K; ++k) total += cs.draw(k, 0.0).N_E;
  EXPECT_GE(total, 0);
  EXPECT_THROW(cs.draw(3, 0.0), std::logic_error);
}
