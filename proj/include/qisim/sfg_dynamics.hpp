#pragma once

// Qubit-approximation SFG evolution and its two-mode-squeezing surrogate.

#include "qisim/log.hpp"
#include "qisim/model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace qisim {

using cplx = std::complex<double>;

/// Per-pair moments of the M-pair SFG system plus the sum-frequency mode.
struct SfgQubitState {
  cplx C{};      // <a_S a_I>
  cplx b{};      // <b>
  double n_b = 0.0;
  double n_si = 0.0;  // <n_S n_I>
  cplx F{};      // <a_S^dag a_I^dag b>
  cplx G{};      // <a_Sm^dag a_Sn a_Im^dag a_In>, m != n
  double n_s = 0.0;
  double n_i = 0.0;
};

/// Initial state with a vacuum sum-frequency mode and Gaussian pairs.
inline SfgQubitState vacuum_b_initial(double n_s, double n_i, cplx C) {
  SfgQubitState s;
  s.C = C;
  s.n_s = n_s;
  s.n_i = n_i;
  s.n_si = n_s * n_i + std::norm(C);
  s.G = std::norm(C);
  return s;
}

/// Closed-form qubit-approximation solution at time t.
inline SfgQubitState evolve_qubit_analytic(const SfgQubitState& init, double g, double t, double M) {
  if (t < 0.0) throw std::invalid_argument("evolve_qubit_analytic: negative time");
  if (!(M >= 1.0)) throw std::invalid_argument("evolve_qubit_analytic: M must be >= 1");
  if (init.b != cplx{} || init.n_b != 0.0 || init.F != cplx{})
    throw std::invalid_argument("evolve_qubit_analytic: b mode must start in vacuum");
  if (M * (init.n_s + init.n_i) >= 0.1)
    warn("evolve_qubit_analytic: M (n_s + n_i) is not << 1; qubit approximation is unreliable");

  const double w = std::sqrt(M) * g * t;
  const double c2 = std::norm(init.C);
  const double th = init.n_s * init.n_i;
  const double s = std::sin(w), c = std::cos(w);
  const cplx I{0.0, 1.0};

  SfgQubitState out;
  out.C = init.C * c;
  out.b = -I * std::sqrt(M) * init.C * s;
  out.n_b = (M * c2 + th) * s * s;
  out.n_si = (1.0 - 1.0 / M) * th + (c2 + th / M) * c * c;
  out.F = -I * std::sqrt(M) * (c2 + th / M) * std::sin(2.0 * w) / 2.0;
  out.G = out.n_si - th;
  out.n_s = init.n_s - out.n_b / M;
  out.n_i = init.n_i - out.n_b / M;
  return out;
}

/// Exact second-moment action of S(r): a_S -> sqrt(1+r^2) a_S - r a_I^dag,
/// a_I -> sqrt(1+r^2) a_I - r a_S^dag.
inline ModePairMoments tms_on_moments(const ModePairMoments& m, double r) {
  const double mu2 = 1.0 + r * r;
  const double mu = std::sqrt(mu2);
  ModePairMoments out;
  out.n_s = mu2 * m.n_s + r * r * (1.0 + m.n_i) - 2.0 * r * mu * m.C_si;
  out.n_i = mu2 * m.n_i + r * r * (1.0 + m.n_s) - 2.0 * r * mu * m.C_si;
  out.C_si = mu2 * m.C_si + r * r * m.C_si - r * mu * (1.0 + m.n_s + m.n_i);
  return out;
}

struct SfgTmsResult {
  ModePairMoments pair;
  cplx b_coherent_amp;
  double b_thermal_mean;
};

/// Quarter-period SFG over M identical pairs, modelled as S(C_si) on each
/// pair plus a coherent+thermal sum-frequency output.
inline SfgTmsResult sfg_quarter_period_as_tms(const ModePairMoments& m, double M) {
  if (m.C_si * m.C_si > m.n_s * m.n_i || m.n_s * m.n_i > 0.1)
    warn("sfg_quarter_period_as_tms: pair moments outside the low-brightness qubit regime");
  return {tms_on_moments(m, m.C_si), cplx{0.0, -std::sqrt(M) * m.C_si}, m.n_s * m.n_i};
}

/// True when the moments sit inside the low-brightness qubit regime.
inline bool in_qubit_regime(const ModePairMoments& m, double M) {
  return M * (m.n_s + m.n_i) < 0.1 && M * m.C_si * m.C_si < 0.1;
}

inline double quarter_period(double g, double M) {
  return std::numbers::pi / (2.0 * std::sqrt(M) * g);
}

}  // namespace qisim
