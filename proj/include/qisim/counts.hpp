#pragma once

// Per-cycle photon-count laws and the cross-cycle correlated sampler.
//
//   N_b : coherent state (mean x) in a thermal background (mean nbar),
//         Laguerre law
//           P(n) = nbar^n / (1+nbar)^(n+1) exp(-x/(1+nbar)) L_n(-x/(nbar(1+nbar)))
//   N_E : total count of M iid thermal modes with mean e each, negative
//         binomial C(n+M-1, n) e^n / (1+e)^(n+M).

#include "qisim/controller.hpp"
#include "qisim/cycle.hpp"
#include "qisim/model.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace qisim {

inline constexpr long kMaxCountsPerCycle = 1'000'000;

struct CountRecord {
  long N_b = 0;
  long N_E = 0;
  long k = 0;
};

/// Count-law parameters for one hypothesis in one cycle.
struct CountLikelihoodParams {
  double coherent_mean = 0.0;  // M r~^2
  double thermal_mean = 0.0;   // eta N_B N_S
  double e_per_mode = 0.0;     // r~^2
  double modes = 1.0;          // M
  bool e_channel = true;       // false when the E modes are not measured
};

/// log P_B(n; x, nbar).
inline double log_p_b_pmf(long n, double coherent_mean, double thermal_mean) {
  if (n < 0 || coherent_mean < 0.0 || thermal_mean < 0.0 || !std::isfinite(coherent_mean) ||
      !std::isfinite(thermal_mean))
    throw std::invalid_argument("p_b_pmf: arguments must be non-negative");
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  const double x = coherent_mean, nb = thermal_mean;
  const double log_pref = -x / (1.0 + nb) - std::log1p(nb);
  if (n == 0) return log_pref;

  // l_n = t^n L_n(-x/(nbar(1+nbar))) with t = nbar/(1+nbar) obeys
  //   l_{n+1} = [((2n+1) t + w) l_n - n t^2 l_{n-1}] / (n+1),  w = x/(1+nbar)^2
  // and stays finite as nbar -> 0 (Poisson limit).
  const double t = nb / (1.0 + nb);
  const double w = x / ((1.0 + nb) * (1.0 + nb));
  double prev = 1.0, cur = t + w, log_scale = 0.0;
  constexpr double big = 1e200, small = 1e-200;
  for (long j = 1; j < n; ++j) {
    const double next = (((2.0 * j + 1.0) * t + w) * cur - j * t * t * prev) / (j + 1.0);
    prev = cur;
    cur = next;
    if (cur > big) {
      prev /= big;
      cur /= big;
      log_scale += std::log(big);
    } else if (cur > 0.0 && cur < small) {
      prev /= small;
      cur /= small;
      log_scale += std::log(small);
    }
  }
  if (!(cur > 0.0)) return ninf;
  return log_pref + std::log(cur) + log_scale;
}

inline double p_b_pmf(long n, double coherent_mean, double thermal_mean) {
  return std::exp(log_p_b_pmf(n, coherent_mean, thermal_mean));
}

namespace counts_detail {

/// lgamma(x) minus its Stirling form, x >= 20.
inline double stirling_tail(double x) {
  const double r = 1.0 / x, r2 = r * r;
  return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)));
}

/// lgamma(n + M) - lgamma(M) without the cancellation of two huge lgammas.
inline double lgamma_ratio(double n, double M) {
  if (M < 20.0) return std::lgamma(n + M) - std::lgamma(M);
  return (M - 0.5) * std::log1p(n / M) + n * std::log(n + M) - n + stirling_tail(n + M) - stirling_tail(M);
}

}  // namespace counts_detail

/// log P_E(n; M, e).
inline double log_p_e_pmf(long n, double M, double e_per_mode) {
  if (n < 0 || !(M >= 0.0) || e_per_mode < 0.0 || !std::isfinite(e_per_mode))
    throw std::invalid_argument("p_e_pmf: invalid arguments");
  if (e_per_mode == 0.0 || M == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  double log_binom = 0.0;
  if (n <= 256) {
    for (long i = 1; i <= n; ++i) log_binom += std::log((M - 1.0 + i) / static_cast<double>(i));
  } else {
    log_binom = counts_detail::lgamma_ratio(static_cast<double>(n), M) - std::lgamma(n + 1.0);
  }
  return log_binom + n * std::log(e_per_mode) - (n + M) * std::log1p(e_per_mode);
}

inline double p_e_pmf(long n, double M, double e_per_mode) { return std::exp(log_p_e_pmf(n, M, e_per_mode)); }

/// log P_BE = log P_B + log P_E (the E term drops out when E is not measured).
inline double joint_log_likelihood(const CountRecord& rec, const CountLikelihoodParams& lp) {
  double l = log_p_b_pmf(rec.N_b, lp.coherent_mean, lp.thermal_mean);
  if (lp.e_channel) l += log_p_e_pmf(rec.N_E, lp.modes, lp.e_per_mode);
  else if (rec.N_E != 0) return -std::numeric_limits<double>::infinity();
  return l;
}

/// Residual squeeze sqrt(eta) C_si^(k)|j - r_k seen by hypothesis j.
inline double residual_squeeze(const ScenarioParams& p, Hypothesis j, long k, double r_k) {
  return std::sqrt(p.effective_eta()) * csi_trajectory(p, j, k) - r_k;
}

/// Count-law parameters under hypothesis j when r_k was applied in cycle k.
/// For r_k = r^(k)_{h~} this reproduces r~ = r^(k)_{h~ xor j} up to sign.
inline CountLikelihoodParams likelihood_params(const ScenarioParams& p, long k, double r_k, Hypothesis j) {
  const double r = residual_squeeze(p, j, k, r_k);
  CountLikelihoodParams lp;
  lp.coherent_mean = p.modes * r * r;
  lp.thermal_mean = p.effective_eta() * p.N_B * p.N_S;
  lp.e_per_mode = r * r;
  lp.modes = p.modes;
  lp.e_channel = p.slicing;
  return lp;
}

/// Bayesian update from a count record and the two hypothesis-conditioned
/// count laws.
inline BeliefState bayes_update(const BeliefState& belief, const CountRecord& rec,
                                const CountLikelihoodParams& given_h0, const CountLikelihoodParams& given_h1) {
  return bayes_update(belief, joint_log_likelihood(rec, given_h0), joint_log_likelihood(rec, given_h1));
}

/// Draws the counts of one trial cycle by cycle.
///
/// N_b is sampled independently per cycle as Poisson(|alpha + z|^2) with z a
/// complex Gaussian of variance nbar, which is exactly the Laguerre law.  The
/// E counts share one total mu_tot ~ N(M a^2, M a^4) (truncated at 0, a the
/// cycle-0 residual) and N_E^(k) ~ Poisson((res_k / a)^2 mu_tot).  When the
/// cycle-0 residual is exactly zero the anchor degenerates and N_E falls back
/// to independent negative-binomial draws.
template <class Rng>
class CountSampler {
 public:
  CountSampler(const ScenarioParams& params, Hypothesis h_true, Rng& rng)
      : p_(params), h_(h_true), rng_(rng), thermal_(params.effective_eta() * params.N_B * params.N_S) {}

  CountRecord draw(long k, double r_k) {
    if (k != next_k_) throw std::logic_error("CountSampler: cycles must be drawn in order");
    ++next_k_;
    const double res = residual_squeeze(p_, h_, k, r_k);
    if (k == 0) anchor(res);

    CountRecord rec;
    rec.k = k;
    rec.N_b = draw_b(std::sqrt(p_.modes) * res);
    rec.N_E = p_.slicing ? draw_e(res) : 0;
    if (rec.N_b > kMaxCountsPerCycle || rec.N_E > kMaxCountsPerCycle)
      throw std::runtime_error("CountSampler: more than 1e6 counts in one cycle (model violation)");
    return rec;
  }

  bool degenerate_anchor() const { return anchor_res_ == 0.0; }
  double mu_total() const { return mu_tot_; }

 private:
  void anchor(double res0) {
    anchor_res_ = res0;
    if (res0 == 0.0 || !p_.slicing || p_.modes == 0.0) return;
    const double a2 = res0 * res0;
    std::normal_distribution<double> nd(p_.modes * a2, std::sqrt(p_.modes) * a2);
    do {
      mu_tot_ = nd(rng_);
    } while (mu_tot_ < 0.0);
  }

  long poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean > 1e7) throw std::runtime_error("CountSampler: Poisson mean too large (model violation)");
    return std::poisson_distribution<long>(mean)(rng_);
  }

  long draw_b(double alpha) {
    double re = alpha, im = 0.0;
    if (thermal_ > 0.0) {
      std::normal_distribution<double> nd(0.0, std::sqrt(thermal_ / 2.0));
      re += nd(rng_);
      im += nd(rng_);
    }
    return poisson(re * re + im * im);
  }

  long draw_e(double res) {
    if (res == 0.0 || p_.modes == 0.0) return 0;
    if (anchor_res_ != 0.0) {
      const double ratio = res / anchor_res_;
      return poisson(ratio * ratio * mu_tot_);
    }
    std::gamma_distribution<double> gd(p_.modes, res * res);
    return poisson(gd(rng_));
  }

  ScenarioParams p_;
  Hypothesis h_;
  Rng& rng_;
  double thermal_;
  double anchor_res_ = 0.0;
  double mu_tot_ = 0.0;
  long next_k_ = 0;
};

struct SampledCycle {
  double r_k = 0.0;
  CountRecord counts;
};

/// Causal controller: returns r_k from the records of cycles < k.
using SqueezeController = std::function<double(long k, std::span<const SampledCycle> history)>;

template <class Rng>
std::vector<SampledCycle> sample_trajectory(const ScenarioParams& params, long K, Hypothesis h_true,
                                            const SqueezeController& controller, Rng& rng) {
  CountSampler<Rng> sampler(params, h_true, rng);
  std::vector<SampledCycle> out;
  out.reserve(static_cast<std::size_t>(K));
  for (long k = 0; k < K; ++k) {
    SampledCycle c;
    c.r_k = controller(k, std::span<const SampledCycle>(out.data(), out.size()));
    c.counts = sampler.draw(k, c.r_k);
    out.push_back(c);
  }
  return out;
}

}  // namespace qisim
