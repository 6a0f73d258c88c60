#pragma once

// Feed-forward law: lambda schedule, Dolinar-style squeeze parameter,
// Bayesian posterior update and tentative decisions.

#include "qisim/cycle.hpp"
#include "qisim/log.hpp"
#include "qisim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace qisim {

struct Schedule {
  std::vector<double> lambdas;     // lambda_k = sqrt(eta) C_si^(k)|h=1
  std::vector<double> cumulative;  // sum_{l<=k} lambda_l^2
  long K = 0;
  double epsilon = 0.0;
  double N_T_coh = 0.0;    // 2 M sum_{k<K} lambda_k^2
  double N_T_therm = 0.0;  // K eta N_B N_S
  double modes = 0.0;
};

/// K = ceil(-ln(eps) / (2 eta N_B)), floored at 1.
inline long cycles_for_epsilon(double epsilon, double eta, double N_B) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  const double k = std::ceil(-std::log(epsilon) / (2.0 * eta * N_B));
  return std::max(1L, static_cast<long>(k));
}

/// eps = exp(-2 eta N_B K).
inline double epsilon_for_cycles(long K, double eta, double N_B) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  return std::exp(-2.0 * eta * N_B * static_cast<double>(K));
}

inline Schedule build_schedule(const ScenarioParams& p) {
  p.validate();
  const double eta = p.effective_eta();
  Schedule s;
  if (!p.slicing) {
    s.K = 1;
    s.epsilon = epsilon_for_cycles(1, eta, p.N_B);
  } else if (p.epsilon) {
    s.K = cycles_for_epsilon(*p.epsilon, eta, p.N_B);
    s.epsilon = *p.epsilon;
  } else {
    s.K = *p.cycles;
    s.epsilon = epsilon_for_cycles(s.K, eta, p.N_B);
  }
  s.modes = p.modes;
  s.lambdas.resize(static_cast<std::size_t>(s.K));
  s.cumulative.resize(static_cast<std::size_t>(s.K));
  double acc = 0.0;
  for (long k = 0; k < s.K; ++k) {
    const double lam = std::sqrt(eta) * csi_trajectory(p, Hypothesis::Present, k);
    s.lambdas[k] = lam;
    acc += lam * lam;
    s.cumulative[k] = acc;
  }
  s.N_T_coh = 2.0 * p.modes * acc;
  s.N_T_therm = static_cast<double>(s.K) * eta * p.N_B * p.N_S;
  return s;
}

/// (1 - eps) M kappa N_S / N_B, the large-N_B continuum estimate of N_T_coh.
inline double asymptotic_coherent_total(const ScenarioParams& p, double epsilon) {
  return (1.0 - epsilon) * p.modes * p.kappa * p.N_S / p.N_B;
}

/// sigma_k = {1 - exp[-2M(sum_{l<=k} lambda_l^2 - lambda_k^2/2)]}^{-1/2}.
inline double sigma_factor(const Schedule& s, long k) {
  if (k < 0 || k >= s.K) throw std::out_of_range("sigma_factor: k outside schedule");
  const double lam = s.lambdas[k];
  double x = 2.0 * s.modes * (s.cumulative[k] - 0.5 * lam * lam);
  x = std::max(x, 1e-300);
  return 1.0 / std::sqrt(-std::expm1(-x));
}

/// r^(k)_h = (lambda_k / 2)(1 - (-1)^h sigma_k), with |r| clamped at
/// 1e3 lambda_0 when sigma_k diverges.
inline double squeeze_param(long k, Hypothesis h_tilde, const Schedule& s) {
  const double lam = s.lambdas.at(static_cast<std::size_t>(k));
  const double sign = h_tilde == Hypothesis::Absent ? 1.0 : -1.0;
  const double r = 0.5 * lam * (1.0 - sign * sigma_factor(s, k));
  const double cap = 1e3 * s.lambdas.front();
  if (std::abs(r) > cap) {
    warn("squeeze_param: sigma_k diverges (M lambda_0^2 too small); clamping |r| at 1e3 lambda_0");
    return std::copysign(cap, r);
  }
  return r;
}

struct BeliefState {
  double p0 = 0.5;
  double p1 = 0.5;
  Hypothesis h_tilde = Hypothesis::Absent;
  long k = 0;

  static BeliefState from_prior(double prior_h1) {
    BeliefState b;
    b.p1 = prior_h1;
    b.p0 = 1.0 - prior_h1;
    b.h_tilde = b.p1 > b.p0 ? Hypothesis::Present : Hypothesis::Absent;
    return b;
  }
};

/// argmax of the posteriors; an exact tie is broken by a fair coin drawn
/// from `rng`.
template <class Rng>
Hypothesis tentative_decision(const BeliefState& belief, Rng& rng) {
  if (belief.p1 > belief.p0) return Hypothesis::Present;
  if (belief.p0 > belief.p1) return Hypothesis::Absent;
  return std::bernoulli_distribution(0.5)(rng) ? Hypothesis::Present : Hypothesis::Absent;
}

/// Posterior after one cycle, given the log-likelihood of the observed
/// counts under j = 0 and j = 1.  Works in log space; the log-likelihood
/// difference is clamped to +-745.  Ties keep the previous h_tilde.
inline BeliefState bayes_update(const BeliefState& prior, double loglik0, double loglik1) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  if (loglik0 == ninf && loglik1 == ninf)
    throw std::domain_error("bayes_update: counts impossible under both hypotheses (model violation)");
  const double lp0 = prior.p0 > 0.0 ? std::log(prior.p0) : ninf;
  const double lp1 = prior.p1 > 0.0 ? std::log(prior.p1) : ninf;

  BeliefState post = prior;
  post.k = prior.k + 1;
  if (lp1 == ninf || loglik1 == ninf) {
    if (lp0 == ninf || loglik0 == ninf)
      throw std::domain_error("bayes_update: posterior undefined (zero mass everywhere)");
    post.p0 = 1.0;
    post.p1 = 0.0;
  } else if (lp0 == ninf || loglik0 == ninf) {
    post.p0 = 0.0;
    post.p1 = 1.0;
  } else {
    // log(p1/p0) after the update
    const double dl = std::clamp(loglik1 - loglik0, -745.0, 745.0);
    const double lo = lp1 - lp0 + dl;
    // p1 = 1/(1+e^{-lo}); computed without overflow
    if (lo >= 0.0) {
      const double e = std::exp(-lo);
      post.p1 = 1.0 / (1.0 + e);
      post.p0 = e / (1.0 + e);
    } else {
      const double e = std::exp(lo);
      post.p0 = 1.0 / (1.0 + e);
      post.p1 = e / (1.0 + e);
    }
  }
  if (post.p1 > post.p0) post.h_tilde = Hypothesis::Present;
  else if (post.p0 > post.p1) post.h_tilde = Hypothesis::Absent;
  return post;
}

}  // namespace qisim
