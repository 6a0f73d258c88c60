#pragma once

// Closed-form bounds and comparator receivers.

#include "qisim/log.hpp"
#include "qisim/model.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace qisim {

struct BoundResult {
  double error_probability = 0.5;
  double log_error = -std::numbers::ln2;  // ln P, kept separately so tails never underflow
  std::string label;

  /// -ln(2 P)
  double exponent() const { return -std::numbers::ln2 - log_error; }
};

inline BoundResult make_bound(double log_p, std::string label) {
  BoundResult b;
  b.log_error = log_p;
  b.error_probability = std::exp(log_p);
  b.label = std::move(label);
  return b;
}

namespace bounds_detail {

/// ln(erfc(x)/2) = ln Q(sqrt(2) x), with the asymptotic series once erfc underflows.
inline double log_half_erfc(double x) {
  const double e = std::erfc(x);
  if (e > 1e-300) return std::log(0.5 * e);
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) - 15.0 / (8.0 * x2 * x2 * x2);
  return -x2 - std::log(x * std::sqrt(std::numbers::pi)) + std::log(series) - std::numbers::ln2;
}

inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

inline void check_state(const Eigen::MatrixXcd& rho, const char* name) {
  if (rho.rows() != rho.cols() || rho.rows() == 0 || rho.rows() > 64)
    throw std::invalid_argument(std::string("helstrom_general: ") + name + " must be square with dimension 1..64");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument(std::string("helstrom_general: ") + name + " is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-10)
    throw std::invalid_argument(std::string("helstrom_general: ") + name + " does not have unit trace");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument(std::string("helstrom_general: ") + name + " is not positive semidefinite");
}

}  // namespace bounds_detail

/// P_H = (1 - || p1 rho1 - p0 rho0 ||_1) / 2.
inline BoundResult helstrom_general(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& rho1, double p1 = 0.5) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("helstrom_general: prior outside [0,1]");
  bounds_detail::check_state(rho0, "rho0");
  bounds_detail::check_state(rho1, "rho1");
  if (rho0.rows() != rho1.rows()) throw std::invalid_argument("helstrom_general: dimension mismatch");
  const Eigen::MatrixXcd gamma = p1 * rho1 - (1.0 - p1) * rho0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma, Eigen::EigenvaluesOnly);
  const double trace_norm = es.eigenvalues().cwiseAbs().sum();
  const double p = std::clamp(0.5 * (1.0 - trace_norm), 0.0, 0.5);
  return make_bound(std::log(p), "helstrom");
}

/// [1 - sqrt(1 - e^{-N})] / 2 for |sqrt N> versus |0>.
inline BoundResult helstrom_coherent_vs_vacuum(double N) {
  if (!(N >= 0.0)) throw std::invalid_argument("helstrom_coherent_vs_vacuum: N must be >= 0");
  // 1 - sqrt(1-u) = u / (1 + sqrt(1-u)), u = e^{-N}
  const double log_p = -N - std::log1p(std::sqrt(-std::expm1(-N))) - std::numbers::ln2;
  return make_bound(log_p, "helstrom");
}

/// exp(-M kappa N_S / N_B) / 2.
inline BoundResult qcb_qi(const ScenarioParams& p) {
  return make_bound(-p.modes * p.kappa * p.N_S / p.N_B - std::numbers::ln2, "qcb");
}

/// M with exp(-M kappa N_S / N_B)/2 = target.
inline double modes_for_qcb(double qcb_target, double N_S, double kappa, double N_B) {
  if (!(qcb_target > 0.0 && qcb_target < 0.5)) throw std::invalid_argument("QCB target must lie in (0, 1/2)");
  return N_B * std::log(1.0 / (2.0 * qcb_target)) / (kappa * N_S);
}

struct WeakSignalBounds {
  BoundResult qcb, opa, homodyne, sfg;
};

/// Low-brightness (N_B << 1) closed forms.
inline WeakSignalBounds weak_signal_bounds(double M, double C_p, double N_S, double N_B) {
  if (N_B > 0.1) warn("weak_signal_bounds: N_B is not << 1; formulas are outside their regime");
  const double x = M * C_p * C_p;
  WeakSignalBounds w;
  w.qcb = make_bound(-x - std::numbers::ln2, "qcb");
  w.opa = make_bound(-x / 2.0 - std::numbers::ln2, "opa");
  w.homodyne = make_bound(-x / 2.0 - std::numbers::ln2, "homodyne");
  const double sfg = std::min(0.5, 0.5 * (std::exp(-x) + N_S * N_B));
  w.sfg = make_bound(std::log(sfg), "sfg");
  return w;
}

/// e^{-4a}/2 for BPSK |alpha>, |-alpha> with |alpha|^2 = a.
inline BoundResult kennedy_error(double alpha_sq) {
  if (!(alpha_sq >= 0.0)) throw std::invalid_argument("kennedy_error: alpha_sq must be >= 0");
  return make_bound(-4.0 * alpha_sq - std::numbers::ln2, "kennedy");
}

/// [1 - e^{-(alpha-beta)^2} + e^{-(alpha+beta)^2}] / 2
inline double improved_kennedy_error(double alpha, double beta) {
  return 0.5 * (-std::expm1(-(alpha - beta) * (alpha - beta)) + std::exp(-(alpha + beta) * (alpha + beta)));
}

/// Displacement minimising improved_kennedy_error, and the minimum.
inline std::pair<double, double> improved_kennedy_optimum(double alpha) {
  const double a = std::abs(alpha);
  auto f = [a](double b) { return improved_kennedy_error(a, b); };
  const auto [beta, val] = boost::math::tools::brent_find_minima(f, 0.0, a + 3.0, 52);
  return {std::copysign(beta, alpha), val};
}

/// Optimum BPSK projector onto the "alpha" outcome in the {|0perp>, |0>} basis.
inline Eigen::Matrix2d bpsk_helstrom_povm(double alpha_sq) {
  if (!(alpha_sq >= 0.0)) throw std::invalid_argument("bpsk_helstrom_povm: alpha_sq must be >= 0");
  const double root = std::sqrt(-std::expm1(-4.0 * alpha_sq));
  const double off = 0.5 * std::exp(-2.0 * alpha_sq);
  Eigen::Matrix2d m;
  m << 0.5 * (1.0 - root), off, off, 0.5 * (1.0 + root);
  return m;
}

/// |sqrt N> versus |0> by homodyne with midpoint threshold: erfc(sqrt(N/2))/2.
inline BoundResult homodyne_coherent_error(double N) {
  if (!(N >= 0.0)) throw std::invalid_argument("homodyne_coherent_error: N must be >= 0");
  return make_bound(bounds_detail::log_half_erfc(std::sqrt(N / 2.0)), "homodyne");
}

namespace bounds_detail {

/// ln P_err of the OPA receiver at gain G with its best count threshold.
inline double opa_log_error(const ScenarioParams& p, double G) {
  const double cp = phase_sensitive_cross_correlation(p);
  const double base = G * p.N_S + (G - 1.0) * (p.N_B + 1.0);
  const double n0 = base, n1 = base + 2.0 * std::sqrt(G * (G - 1.0)) * cp;
  const double M = p.modes;
  const double m0 = M * n0, m1 = M * n1;
  const double s0 = std::sqrt(M * n0 * (n0 + 1.0)), s1 = std::sqrt(M * n1 * (n1 + 1.0));
  if (!(m1 > m0) || !(s0 > 0.0)) return -std::numbers::ln2;
  // equal priors: P = [Q((t-m0)/s0) + Q((m1-t)/s1)] / 2, minimised over t
  auto logp = [&](double t) {
    const double a = log_half_erfc((t - m0) / (s0 * std::numbers::sqrt2));
    const double b = log_half_erfc((m1 - t) / (s1 * std::numbers::sqrt2));
    return log_add(a, b) - std::numbers::ln2;
  };
  const auto r = boost::math::tools::brent_find_minima(logp, m0, m1, 52);
  return std::min(r.second, -std::numbers::ln2);
}

}  // namespace bounds_detail

/// OPA receiver comparator: Gaussian approximation of the total count over M
/// mode pairs, min-error threshold, gain optimised when not given.
inline BoundResult opa_qi_error(const ScenarioParams& p, std::optional<double> gain = std::nullopt) {
  if (gain) {
    if (!(*gain > 1.0)) throw std::invalid_argument("opa_qi_error: gain must exceed 1");
    return make_bound(bounds_detail::opa_log_error(p, *gain), "opa");
  }
  if (phase_sensitive_cross_correlation(p) == 0.0 || p.modes == 0.0) return make_bound(-std::numbers::ln2, "opa");
  const double hi = 1.0 + 10.0 * std::sqrt(p.N_S / p.N_B);
  auto f = [&](double G) { return bounds_detail::opa_log_error(p, G); };
  const auto r = boost::math::tools::brent_find_minima(f, 1.0 + 1e-12 * (hi - 1.0), hi, 52);
  return make_bound(r.second, "opa");
}

/// Large-deviation exponent slope -(ln P(N2) - ln P(N1)) / (N2 - N1).
inline double exponent_slope(const std::function<double(double)>& log_p, double N1, double N2) {
  if (!(N2 > N1)) throw std::invalid_argument("exponent_slope: need N2 > N1");
  return -(log_p(N2) - log_p(N1)) / (N2 - N1);
}

}  // namespace qisim
