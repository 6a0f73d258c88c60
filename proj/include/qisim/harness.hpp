#pragma once

// Full receiver trials, Monte Carlo error estimates and parameter sweeps.

#include "qisim/bounds.hpp"
#include "qisim/controller.hpp"
#include "qisim/counts.hpp"
#include "qisim/model.hpp"
#include "qisim/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qisim {

enum class Receiver { SFG, FFSFG };

inline const char* receiver_name(Receiver r) { return r == Receiver::SFG ? "sfg" : "ffsfg"; }

struct ReceiverOptions {
  long sfg_count_threshold = 0;  // SFG decides "present" when total counts exceed this
};

struct CycleRecord {
  long k = 0;
  double r_k = 0.0;
  long N_b = 0;
  long N_E = 0;
  double p0 = 0.5;
  double p1 = 0.5;
  Hypothesis h_tilde = Hypothesis::Absent;  // after this cycle's update
};

struct TrialTrajectory {
  std::vector<CycleRecord> cycles;
  Hypothesis initial_guess = Hypothesis::Absent;
  Hypothesis decision = Hypothesis::Absent;
  Hypothesis h_true = Hypothesis::Absent;
};

/// One trial with a prebuilt schedule.
template <class R>
TrialTrajectory run_trial(const ScenarioParams& p, const Schedule& s, Receiver receiver, Hypothesis h_true, R& rng,
                          const ReceiverOptions& opt = {}) {
  TrialTrajectory tr;
  tr.h_true = h_true;
  tr.cycles.reserve(static_cast<std::size_t>(s.K));

  BeliefState belief = BeliefState::from_prior(p.prior_h1);
  belief.h_tilde = tentative_decision(belief, rng);
  tr.initial_guess = belief.h_tilde;

  CountSampler<R> sampler(p, h_true, rng);
  long total = 0;
  for (long k = 0; k < s.K; ++k) {
    const double r = receiver == Receiver::FFSFG ? squeeze_param(k, belief.h_tilde, s) : 0.0;
    const CountRecord rec = sampler.draw(k, r);
    belief = bayes_update(belief, rec, likelihood_params(p, k, r, Hypothesis::Absent),
                          likelihood_params(p, k, r, Hypothesis::Present));
    total += rec.N_b + rec.N_E;
    tr.cycles.push_back({k, r, rec.N_b, rec.N_E, belief.p0, belief.p1, belief.h_tilde});
  }
  if (receiver == Receiver::FFSFG)
    tr.decision = belief.h_tilde;
  else
    tr.decision = total > opt.sfg_count_threshold ? Hypothesis::Present : Hypothesis::Absent;
  return tr;
}

template <class R>
TrialTrajectory run_trial(const ScenarioParams& p, Receiver receiver, Hypothesis h_true, R& rng,
                          const ReceiverOptions& opt = {}) {
  return run_trial(p, build_schedule(p), receiver, h_true, rng, opt);
}

struct ErrorEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long trials = 0;
  std::uint64_t seed = 0;
  long misses = 0;        // h_true = 1 decided 0
  long false_alarms = 0;  // h_true = 0 decided 1
  long trials_h1 = 0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// 95% Wilson interval for k successes out of n.
inline std::pair<double, double> wilson_interval(double k, double n, double z = kZ95) {
  if (!(n > 0.0)) throw std::invalid_argument("wilson_interval: n must be > 0");
  const double ph = k / n, z2 = z * z;
  const double centre = (ph + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
  return {k <= 0.0 ? 0.0 : std::max(0.0, centre - half), k >= n ? 1.0 : std::min(1.0, centre + half)};
}

/// Worker count: hardware concurrency, capped by QISIM_THREADS.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QISIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs `trials` trials, the first round(trials * (1 - prior)) under h = 0
/// and the rest under h = 1; trial i draws from stream_rng(seed, i).  The
/// result depends only on (params, receiver, trials, seed).  `workers` = 0
/// picks worker_count().
inline ErrorEstimate estimate_error(const ScenarioParams& p, Receiver receiver, long trials, std::uint64_t seed,
                                    const ReceiverOptions& opt = {}, unsigned workers = 0) {
  if (trials < 100) throw std::invalid_argument("estimate_error: need at least 100 trials");
  const Schedule s = build_schedule(p);
  const long n0 = std::lround(static_cast<double>(trials) * (1.0 - p.prior_h1));
  const long n1 = trials - n0;

  std::atomic<long> next{0}, misses{0}, fas{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  constexpr long chunk = 256;
  auto work = [&] {
    try {
      long miss = 0, fa = 0;
      for (;;) {
        const long begin = next.fetch_add(chunk);
        if (begin >= trials) break;
        const long end = std::min(trials, begin + chunk);
        for (long i = begin; i < end; ++i) {
          const Hypothesis h = i < n0 ? Hypothesis::Absent : Hypothesis::Present;
          Rng rng = stream_rng(seed, static_cast<std::uint64_t>(i));
          const Hypothesis d = run_trial(p, s, receiver, h, rng, opt).decision;
          if (d != h) (h == Hypothesis::Present ? miss : fa)++;
        }
      }
      misses += miss;
      fas += fa;
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = trials;
    }
  };
  const unsigned nw =
      std::min<unsigned>(workers ? workers : worker_count(), static_cast<unsigned>((trials + chunk - 1) / chunk));
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ErrorEstimate e;
  e.trials = trials;
  e.seed = seed;
  e.misses = misses;
  e.false_alarms = fas;
  e.trials_h1 = n1;
  const double pm = n1 > 0 ? static_cast<double>(e.misses) / n1 : 0.0;
  const double pf = n0 > 0 ? static_cast<double>(e.false_alarms) / n0 : 0.0;
  e.p_hat = p.prior_h1 * pm + (1.0 - p.prior_h1) * pf;
  const auto [lo, hi] = wilson_interval(e.p_hat * trials, static_cast<double>(trials));
  e.ci_low = std::min(lo, e.p_hat);
  e.ci_high = std::max(hi, e.p_hat);
  return e;
}

/// M giving the exact discrete coherent total 2 M sum_k lambda_k^2 = N_T_coh.
inline double modes_for_coherent_total(ScenarioParams p, double N_T_coh) {
  if (!(N_T_coh > 0.0)) throw std::invalid_argument("N_T_coh must be > 0");
  p.modes = 1.0;
  const Schedule s = build_schedule(p);
  return N_T_coh / (2.0 * s.cumulative.back());
}

/// M giving M C_p^2 = x.
inline double modes_for_weak_signal(const ScenarioParams& p, double x) {
  const double cp = phase_sensitive_cross_correlation(p);
  return x / (cp * cp);
}

enum class SweepMode { Fig2a, Fig2b };

struct SweepSpec {
  SweepMode mode = SweepMode::Fig2a;
  ScenarioParams base;
  std::vector<double> values;  // M (fig2a) or N_S (fig2b)
  double qcb_target = 0.1;     // fig2b only
  long trials = 10000;
  std::uint64_t seed = 1;
  bool run_sfg = true;
  bool run_ffsfg = true;
};

struct SweepRow {
  double value = 0.0;  // sweep coordinate
  double modes = 0.0;
  double N_T = 0.0;  // M kappa N_S / N_B
  std::optional<ErrorEstimate> sfg, ffsfg;
  double p_opa = 0.5, p_hom = 0.5, p_helstrom = 0.5, p_qcb = 0.5;
};

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  if (spec.mode == SweepMode::Fig2b && !(spec.qcb_target > 0.0 && spec.qcb_target < 0.5))
    throw std::invalid_argument("sweep: qcb target must lie in (0, 1/2)");
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    ScenarioParams p = spec.base;
    SweepRow row;
    row.value = spec.values[i];
    if (spec.mode == SweepMode::Fig2a) {
      p.modes = spec.values[i];
    } else {
      p.N_S = spec.values[i];
      p.modes = modes_for_qcb(spec.qcb_target, p.N_S, p.kappa, p.N_B);
    }
    p.validate();
    row.modes = p.modes;
    row.N_T = p.modes * p.kappa * p.N_S / p.N_B;
    const std::uint64_t seed = derive_seed(spec.seed, i);
    if (spec.run_sfg) row.sfg = estimate_error(p, Receiver::SFG, spec.trials, seed);
    if (spec.run_ffsfg) row.ffsfg = estimate_error(p, Receiver::FFSFG, spec.trials, seed);
    row.p_opa = opa_qi_error(p).error_probability;
    row.p_hom = homodyne_coherent_error(row.N_T).error_probability;
    row.p_helstrom = helstrom_coherent_vs_vacuum(row.N_T).error_probability;
    row.p_qcb = qcb_qi(p).error_probability;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qisim
