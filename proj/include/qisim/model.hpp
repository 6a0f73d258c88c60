#pragma once

// Scenario parameters and the two-mode Gaussian structures shared by every
// other module: the returned-signal / retained-idler covariance and the
// aggregate per-pair moments that the receiver cycles propagate.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qisim {

enum class Hypothesis : int { Absent = 0, Present = 1 };

inline int to_int(Hypothesis h) { return static_cast<int>(h); }
inline Hypothesis hypothesis_from(int j) {
  if (j != 0 && j != 1) throw std::invalid_argument("hypothesis must be 0 or 1");
  return j == 0 ? Hypothesis::Absent : Hypothesis::Present;
}
inline Hypothesis flip(Hypothesis h) {
  return h == Hypothesis::Absent ? Hypothesis::Present : Hypothesis::Absent;
}

/// All physical and receiver parameters of one detection scenario.
///
/// `modes` is the number of signal-idler pairs M.  It only ever enters
/// through closed-form expressions, so it is stored as a real number and
/// may be as large as 1e9 without cost.  Exactly one of `epsilon` / `cycles`
/// is the user's choice; the other is derived by the schedule builder.
struct ScenarioParams {
  double N_S = 1e-4;     // mean signal photons per mode
  double kappa = 0.01;   // roundtrip transmissivity
  double N_B = 20.0;     // mean background photons per mode
  double modes = 1e7;    // M
  double eta = 0.002;    // slicing beam-splitter transmissivity
  std::optional<double> epsilon;          // termination residual fraction
  std::optional<long> cycles = 42;        // K
  double prior_h1 = 0.5;
  double g = 1.0;        // SFG interaction strength
  // When false the receiver performs one SFG pass over the unsliced pairs
  // (eta treated as 1, one cycle, no E-mode measurement).
  bool slicing = true;

  bool operator==(const ScenarioParams&) const = default;

  double effective_eta() const { return slicing ? eta : 1.0; }

  /// Throws std::invalid_argument on hard violations.
  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (!(N_S > 0.0) || !std::isfinite(N_S)) fail("N_S must be > 0");
    if (!(kappa >= 0.0 && kappa <= 1.0)) fail("kappa must lie in [0,1]");
    if (!(N_B > 0.0) || !std::isfinite(N_B)) fail("N_B must be > 0");
    if (!(modes >= 0.0) || !std::isfinite(modes)) fail("M must be >= 0");
    if (!(eta > 0.0 && eta < 1.0)) fail("eta must lie in (0,1)");
    if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) fail("epsilon must lie in (0,1)");
    if (cycles && *cycles < 1) fail("K must be a positive integer");
    if (epsilon && cycles) fail("supply only one of epsilon and K");
    if (!epsilon && !cycles) fail("one of epsilon and K is required");
    if (!(prior_h1 > 0.0 && prior_h1 < 1.0)) fail("prior_h1 must lie in (0,1)");
    if (!(g > 0.0) || !std::isfinite(g)) fail("g must be > 0");
  }

  /// Regime checks; the model is still evaluated outside them.
  std::vector<std::string> regime_warnings() const;
};

/// C_p = sqrt(kappa N_S (N_S + 1)).
inline double phase_sensitive_cross_correlation(const ScenarioParams& p) {
  return std::sqrt(p.kappa * p.N_S * (p.N_S + 1.0));
}

inline std::vector<std::string> ScenarioParams::regime_warnings() const {
  std::vector<std::string> w;
  const double cp = phase_sensitive_cross_correlation(*this);
  const double e = effective_eta();
  if (!(N_S < 0.1)) w.emplace_back("N_S is not << 1; first-order moment recursion is inaccurate");
  if (slicing && !(N_B > 1.0)) w.emplace_back("N_B is not >> 1");
  if (!(e * (1.0 + N_B) < 0.1)) w.emplace_back("eta*(1+N_B) is not << 1; qubit approximation may fail");
  if (!(e * N_B * N_S < modes * e * cp * cp))
    w.emplace_back("thermal b-mode photons exceed the coherent contribution (eta N_B N_S >= M eta C_p^2)");
  return w;
}

/// Aggregate second moments of one (returned-signal, retained-idler) pair.
struct ModePairMoments {
  double n_s = 0.0;
  double n_i = 0.0;
  double C_si = 0.0;

  /// Gaussian physicality: both thermal occupations of the Williamson form
  /// are non-negative.
  bool is_physical(double tol = 1e-12) const {
    if (n_s < -tol || n_i < -tol) return false;
    const double s = 1.0 + n_s + n_i;
    const double disc = s * s - 4.0 * C_si * C_si;
    if (disc < 0.0) return false;
    return std::sqrt(disc) >= 1.0 + std::abs(n_s - n_i) - tol;
  }
};

/// 4x4 Wigner covariance in the ordering (x_S, p_S, x_I, p_I), vacuum
/// quadrature variance 1/4.
struct WignerCovariance {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity() / 4.0;

  /// Symplectic eigenvalues (nu_minus, nu_plus) of the two-mode matrix.
  std::array<double, 2> symplectic_eigenvalues() const {
    const Eigen::Matrix2d A = m.block<2, 2>(0, 0);
    const Eigen::Matrix2d B = m.block<2, 2>(2, 2);
    const Eigen::Matrix2d C = m.block<2, 2>(0, 2);
    const double delta = A.determinant() + B.determinant() + 2.0 * C.determinant();
    const double det = m.determinant();
    const double root = std::sqrt(std::max(0.0, delta * delta - 4.0 * det));
    const double big = (delta + root) / 2.0;
    // small one from the product, the difference cancels for bright modes
    return {big > 0.0 ? std::sqrt(std::max(0.0, det / big)) : 0.0, std::sqrt(std::max(0.0, big))};
  }

  bool is_physical(double tol = 1e-12) const {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    return symplectic_eigenvalues()[0] >= 0.25 - tol;
  }
};

/// Covariance conditioned on hypothesis h.
inline WignerCovariance build_covariance(const ScenarioParams& p, Hypothesis h) {
  const double cp = h == Hypothesis::Present ? phase_sensitive_cross_correlation(p) : 0.0;
  WignerCovariance cov;
  cov.m.setZero();
  cov.m(0, 0) = cov.m(1, 1) = (2.0 * p.N_B + 1.0) / 4.0;
  cov.m(2, 2) = cov.m(3, 3) = (2.0 * p.N_S + 1.0) / 4.0;
  cov.m(0, 2) = cov.m(2, 0) = cp / 2.0;
  cov.m(1, 3) = cov.m(3, 1) = -cp / 2.0;
  return cov;
}

/// Covariance of a pair with the given moments (real C_si).
inline WignerCovariance covariance_from_moments(const ModePairMoments& mm) {
  WignerCovariance cov;
  cov.m.setZero();
  cov.m(0, 0) = cov.m(1, 1) = (2.0 * mm.n_s + 1.0) / 4.0;
  cov.m(2, 2) = cov.m(3, 3) = (2.0 * mm.n_i + 1.0) / 4.0;
  cov.m(0, 2) = cov.m(2, 0) = mm.C_si / 2.0;
  cov.m(1, 3) = cov.m(3, 1) = -mm.C_si / 2.0;
  return cov;
}

/// Inverse of covariance_from_moments.  Phase-insensitive cross terms and
/// quadrature asymmetry are averaged out; an unphysical matrix throws.
inline ModePairMoments moments_from_covariance(const WignerCovariance& cov) {
  if (!cov.is_physical(1e-12))
    throw std::domain_error("covariance violates the uncertainty principle");
  const auto& m = cov.m;
  ModePairMoments mm;
  mm.n_s = (2.0 * (m(0, 0) + m(1, 1)) - 1.0) / 2.0;
  mm.n_i = (2.0 * (m(2, 2) + m(3, 3)) - 1.0) / 2.0;
  mm.C_si = m(0, 2) - m(1, 3);
  return mm;
}

/// Moments of the returned-signal / retained-idler pair under h.
inline ModePairMoments initial_moments(const ScenarioParams& p, Hypothesis h) {
  return {p.N_B, p.N_S, h == Hypothesis::Present ? phase_sensitive_cross_correlation(p) : 0.0};
}

}  // namespace qisim
