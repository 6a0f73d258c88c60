#pragma once

// One receiver cycle: slice, S(r_k), SFG, S(-r_k), recombine, S(eps_k).
// Propagated at the level of aggregate pair moments; cost is O(1) in M.

#include "qisim/model.hpp"
#include "qisim/sfg_dynamics.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qisim {

struct CycleOutput {
  ModePairMoments out_moments;  // inputs to cycle k+1
  cplx b_amp;                   // coherent amplitude of the sum-frequency mode
  double b_thermal = 0.0;       // thermal photons in the sum-frequency mode
  double e_mean_per_mode = 0.0; // photons per E mode
  double r_effective = 0.0;     // residual squeeze sqrt(eta) C_si - r_k

  /// Coherent part of <N_b>, equal to the mean total E count.
  double coherent_photons(double M) const { return M * r_effective * r_effective; }
};

/// Leading-order moment chain of one cycle.  The pair moments use the
/// first-order-in-eta results with the S(eps_k) correction applied, so the
/// output cross correlation does not depend on r_k.
inline CycleOutput propagate_cycle(const ModePairMoments& in, double r_k, const ScenarioParams& params) {
  if (!std::isfinite(r_k)) throw std::invalid_argument("propagate_cycle: r_k must be finite");
  const double eta = params.effective_eta();
  const double se = std::sqrt(eta);
  const double f = r_k / se;
  const double c = in.C_si;

  CycleOutput out;
  out.r_effective = se * c - r_k;
  out.b_amp = cplx{0.0, -std::sqrt(params.modes) * out.r_effective};
  out.b_thermal = eta * in.n_s * in.n_i;
  out.e_mean_per_mode = out.r_effective * out.r_effective;
  out.out_moments.n_s = in.n_s - 2.0 * eta * c * c;
  out.out_moments.n_i = in.n_i - eta * (c * c - f * f + 2.0 * f * c);
  out.out_moments.C_si = c * (1.0 - eta * (1.0 + in.n_s));
  return out;
}

/// Closed form C_si^(k) | h = j C_p [1 - eta (1 + N_B)]^k.
inline double csi_trajectory(const ScenarioParams& params, Hypothesis h, long k) {
  if (k < 0) throw std::invalid_argument("csi_trajectory: k must be >= 0");
  if (h == Hypothesis::Absent) return 0.0;
  const double q = 1.0 - params.effective_eta() * (1.0 + params.N_B);
  return phase_sensitive_cross_correlation(params) * std::pow(q, static_cast<double>(k));
}

}  // namespace qisim
