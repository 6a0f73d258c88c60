#pragma once

// Truncated Fock-space Schrodinger integration of the M-pair SFG
// Hamiltonian, used to validate the qubit-approximation solutions.
//
// Modes are ordered (b, S_1, I_1, ..., S_M, I_M), each truncated to
// `truncation` levels.  Both the Hamiltonian and the initial state conserve
// D_m = n_Sm - n_Im for every pair, so rho is block diagonal in the sectors
// labelled by (D_1..D_M) and each block is integrated on its own.

#include "qisim/sfg_dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qisim {

struct FockConfig {
  int M = 1;
  int truncation = 4;   // levels per mode, >= 2
  double dt = 0.0;      // integrator step
  double t_final = 0.0;
  int output_stride = 20;  // integrator steps between recorded samples

  /// Quarter-period run with 2000 steps.
  static FockConfig quarter_period_run(int M, int truncation, double g = 1.0) {
    FockConfig c;
    c.M = M;
    c.truncation = truncation;
    c.t_final = quarter_period(g, M);
    c.dt = c.t_final / 2000.0;
    return c;
  }

  void validate() const {
    if (M < 1 || M > 3) throw std::invalid_argument("FockConfig: M must be 1, 2 or 3");
    if (truncation < 2) throw std::invalid_argument("FockConfig: truncation must be >= 2");
    if (!(dt > 0.0)) throw std::invalid_argument("FockConfig: dt must be > 0");
    if (!(t_final >= 0.0)) throw std::invalid_argument("FockConfig: t_final must be >= 0");
    if (output_stride < 1) throw std::invalid_argument("FockConfig: output_stride must be >= 1");
  }
};

struct FockSample {
  double t = 0.0;
  SfgQubitState moments;
  double trace = 1.0;
};

namespace fock_detail {

inline constexpr std::uint64_t kMaxDimension = std::uint64_t{1} << 22;

class Basis {
 public:
  Basis(int M, int levels) : M_(M), L_(levels), modes_(2 * M + 1) {
    std::uint64_t d = 1;
    for (int i = 0; i < modes_; ++i) {
      d *= static_cast<std::uint64_t>(L_);
      if (d > kMaxDimension) throw std::length_error("Fock space dimension too large");
    }
    dim_ = static_cast<std::size_t>(d);
  }

  std::size_t dim() const { return dim_; }
  int modes() const { return modes_; }
  int levels() const { return L_; }
  int pairs() const { return M_; }
  static int b_mode() { return 0; }
  static int s_mode(int m) { return 1 + 2 * m; }
  static int i_mode(int m) { return 2 + 2 * m; }

  std::vector<int> decode(std::size_t idx) const {
    std::vector<int> occ(modes_);
    for (int k = modes_ - 1; k >= 0; --k) {
      occ[k] = static_cast<int>(idx % L_);
      idx /= L_;
    }
    return occ;
  }

  std::size_t encode(const std::vector<int>& occ) const {
    std::size_t idx = 0;
    for (int k = 0; k < modes_; ++k) idx = idx * L_ + occ[k];
    return idx;
  }

  std::vector<int> sector_key(const std::vector<int>& occ) const {
    std::vector<int> key(M_);
    for (int m = 0; m < M_; ++m) key[m] = occ[s_mode(m)] - occ[i_mode(m)];
    return key;
  }

 private:
  int M_, L_, modes_;
  std::size_t dim_ = 0;
};

/// One ladder operator; operators in a product act right to left.
struct Ladder {
  int mode;
  bool create;
};

/// Applies prod(ops) to a number state; nullopt when the result vanishes
/// or leaves the truncated space.
inline std::optional<std::pair<double, std::vector<int>>> apply(const std::vector<Ladder>& ops,
                                                                std::vector<int> occ, int levels) {
  double amp = 1.0;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    int& n = occ[it->mode];
    if (it->create) {
      if (n + 1 >= levels) return std::nullopt;
      amp *= std::sqrt(static_cast<double>(n + 1));
      ++n;
    } else {
      if (n == 0) return std::nullopt;
      amp *= std::sqrt(static_cast<double>(n));
      --n;
    }
  }
  return std::make_pair(amp, std::move(occ));
}

/// Terms of H/g: b^dag a_S a_I + b a_S^dag a_I^dag for every pair.
inline std::vector<std::vector<Ladder>> hamiltonian_terms(int M) {
  std::vector<std::vector<Ladder>> terms;
  for (int m = 0; m < M; ++m) {
    const int s = Basis::s_mode(m), i = Basis::i_mode(m);
    terms.push_back({{Basis::b_mode(), true}, {s, false}, {i, false}});
    terms.push_back({{Basis::b_mode(), false}, {s, true}, {i, true}});
  }
  return terms;
}

/// Thermal occupations and squeeze that realise (n_s, n_i, C) as
/// S(s e^{i theta}) acting on a product of thermal states.
struct GaussianRealisation {
  double nu_s, nu_i, squeeze, phase;
};

inline GaussianRealisation realise_pair(double n_s, double n_i, cplx C) {
  const double total = 1.0 + n_s + n_i;
  const double disc = total * total - 4.0 * std::norm(C);
  if (disc <= 0.0) throw std::domain_error("pair moments are unphysical");
  const double sum = std::sqrt(disc);  // 1 + nu_s + nu_i
  double nu_s = (sum - 1.0 + (n_s - n_i)) / 2.0;
  double nu_i = (sum - 1.0 - (n_s - n_i)) / 2.0;
  if (nu_s < -1e-12 || nu_i < -1e-12) throw std::domain_error("pair moments are unphysical");
  nu_s = std::max(nu_s, 0.0);
  nu_i = std::max(nu_i, 0.0);
  const double squeeze = 0.5 * std::atanh(2.0 * std::abs(C) / total);
  return {nu_s, nu_i, squeeze, std::arg(C)};
}

}  // namespace fock_detail

/// Fock density matrix of the zero-mean two-mode Gaussian state with the
/// given moments, truncated to `levels` per mode and renormalised.  Index
/// is n_S * levels + n_I.
inline Eigen::MatrixXcd two_mode_gaussian_fock(double n_s, double n_i, cplx C, int levels) {
  const auto g = fock_detail::realise_pair(n_s, n_i, C);
  const int big = std::max(levels + 16, 24);
  const int dim = big * big;
  auto idx = [big](int s, int i) { return s * big + i; };

  Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(dim, dim);
  auto thermal = [](double nu, int k) { return std::pow(nu, k) / std::pow(1.0 + nu, k + 1); };
  for (int s = 0; s < big; ++s)
    for (int i = 0; i < big; ++i) rho0(idx(s, i), idx(s, i)) = thermal(g.nu_s, s) * thermal(g.nu_i, i);

  // K = e^{i theta} a^dag b^dag - e^{-i theta} a b
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(dim, dim);
  const cplx ph = std::polar(1.0, g.phase);
  for (int s = 0; s + 1 < big; ++s)
    for (int i = 0; i + 1 < big; ++i) {
      const double a = std::sqrt(static_cast<double>((s + 1) * (i + 1)));
      K(idx(s + 1, i + 1), idx(s, i)) += ph * a;
      K(idx(s, i), idx(s + 1, i + 1)) -= std::conj(ph) * a;
    }
  const Eigen::MatrixXcd U = (g.squeeze * K).exp();
  const Eigen::MatrixXcd rho_big = U * rho0 * U.adjoint();

  Eigen::MatrixXcd rho(levels * levels, levels * levels);
  for (int s = 0; s < levels; ++s)
    for (int i = 0; i < levels; ++i)
      for (int s2 = 0; s2 < levels; ++s2)
        for (int i2 = 0; i2 < levels; ++i2)
          rho(s * levels + i, s2 * levels + i2) = rho_big(idx(s, i), idx(s2, i2));
  rho /= rho.trace().real();
  return rho;
}

/// Interaction-picture Hamiltonian (hbar = 1) on the full truncated space.
inline Eigen::SparseMatrix<double> build_hamiltonian(const FockConfig& config, double g) {
  if (config.M < 1) throw std::invalid_argument("build_hamiltonian: M must be >= 1");
  if (config.truncation < 2) throw std::invalid_argument("build_hamiltonian: truncation must be >= 2");
  const fock_detail::Basis basis(config.M, config.truncation);
  std::vector<Eigen::Triplet<double>> trips;
  const auto terms = fock_detail::hamiltonian_terms(config.M);
  for (std::size_t j = 0; j < basis.dim(); ++j) {
    const auto occ = basis.decode(j);
    for (const auto& term : terms)
      if (auto r = fock_detail::apply(term, occ, basis.levels()))
        if (g != 0.0) trips.emplace_back(static_cast<int>(basis.encode(r->second)), static_cast<int>(j), g * r->first);
  }
  Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(basis.dim()), static_cast<Eigen::Index>(basis.dim()));
  H.setFromTriplets(trips.begin(), trips.end());
  H.makeCompressed();
  return H;
}

namespace fock_detail {

struct ObservableEntry {
  int col;  // j in O|j> = amp |i>
  int row;  // i
  double amp;
};

struct Sector {
  std::vector<std::size_t> states;  // global indices
  Eigen::SparseMatrix<cplx> H;
  Eigen::MatrixXcd rho;
  // One entry list per observable (see Observables below).
  std::vector<std::vector<ObservableEntry>> obs;
};

enum Observable { kC, kB, kNb, kNsi, kF, kG, kNs, kNi, kObservableCount };

/// Operator products for each observable, one per pair (or ordered pair
/// of pairs for G); expectations are averaged over the list.
inline std::vector<std::vector<std::vector<Ladder>>> observable_products(int M) {
  std::vector<std::vector<std::vector<Ladder>>> out(kObservableCount);
  const int b = Basis::b_mode();
  for (int m = 0; m < M; ++m) {
    const int s = Basis::s_mode(m), i = Basis::i_mode(m);
    out[kC].push_back({{s, false}, {i, false}});
    out[kNsi].push_back({{s, true}, {s, false}, {i, true}, {i, false}});
    out[kF].push_back({{s, true}, {i, true}, {b, false}});
    out[kNs].push_back({{s, true}, {s, false}});
    out[kNi].push_back({{i, true}, {i, false}});
    for (int n = 0; n < M; ++n) {
      if (n == m) continue;
      const int sn = Basis::s_mode(n), in = Basis::i_mode(n);
      out[kG].push_back({{s, true}, {sn, false}, {i, true}, {in, false}});
    }
  }
  out[kB].push_back({{b, false}});
  out[kNb].push_back({{b, true}, {b, false}});
  return out;
}

}  // namespace fock_detail

/// Integrates d rho/dt = -i[H, rho] with fixed-step RK4 from a product of
/// identical Gaussian pairs and a vacuum b mode.  Throws std::runtime_error
/// when |tr rho - 1| exceeds 1e-6.
inline std::vector<FockSample> fock_evolve(double n_s0, double n_i0, cplx C0, const FockConfig& config,
                                           double g = 1.0) {
  using namespace fock_detail;
  config.validate();
  const Basis basis(config.M, config.truncation);
  const int L = config.truncation;
  const Eigen::MatrixXcd pair = two_mode_gaussian_fock(n_s0, n_i0, C0, L);

  // Group basis states by sector.
  std::map<std::vector<int>, std::size_t> sector_of_key;
  std::vector<Sector> sectors;
  std::vector<std::pair<std::size_t, int>> where(basis.dim());  // (sector, local)
  for (std::size_t j = 0; j < basis.dim(); ++j) {
    const auto key = basis.sector_key(basis.decode(j));
    auto [it, inserted] = sector_of_key.try_emplace(key, sectors.size());
    if (inserted) sectors.emplace_back();
    auto& sec = sectors[it->second];
    where[j] = {it->second, static_cast<int>(sec.states.size())};
    sec.states.push_back(j);
  }

  const auto terms = hamiltonian_terms(config.M);
  const auto products = observable_products(config.M);

  for (std::size_t si = 0; si < sectors.size(); ++si) {
    auto& sec = sectors[si];
    const auto n = static_cast<Eigen::Index>(sec.states.size());
    std::vector<Eigen::Triplet<cplx>> trips;
    sec.obs.assign(kObservableCount, {});
    sec.rho = Eigen::MatrixXcd::Zero(n, n);

    for (Eigen::Index lj = 0; lj < n; ++lj) {
      const auto occ = basis.decode(sec.states[lj]);
      for (const auto& term : terms)
        if (auto r = apply(term, occ, L)) {
          const auto [s2, li] = where[basis.encode(r->second)];
          if (s2 != si) throw std::logic_error("Hamiltonian left its sector");
          trips.emplace_back(li, static_cast<int>(lj), cplx{g * r->first, 0.0});
        }
      for (int o = 0; o < kObservableCount; ++o)
        for (const auto& prod : products[o])
          if (auto r = apply(prod, occ, L)) {
            const auto [s2, li] = where[basis.encode(r->second)];
            if (s2 != si) throw std::logic_error("observable left its sector");
            sec.obs[o].push_back({static_cast<int>(lj), li, r->first});
          }
    }
    sec.H.resize(n, n);
    sec.H.setFromTriplets(trips.begin(), trips.end());
    sec.H.makeCompressed();

    // Initial rho: b in vacuum, pairs in the product Gaussian state.
    for (Eigen::Index a = 0; a < n; ++a) {
      const auto oa = basis.decode(sec.states[a]);
      if (oa[Basis::b_mode()] != 0) continue;
      for (Eigen::Index c = 0; c < n; ++c) {
        const auto oc = basis.decode(sec.states[c]);
        if (oc[Basis::b_mode()] != 0) continue;
        cplx v{1.0, 0.0};
        for (int m = 0; m < config.M && v != cplx{}; ++m) {
          const int ra = oa[Basis::s_mode(m)] * L + oa[Basis::i_mode(m)];
          const int rc = oc[Basis::s_mode(m)] * L + oc[Basis::i_mode(m)];
          v *= pair(ra, rc);
        }
        sec.rho(a, c) = v;
      }
    }
  }

  auto sample = [&](double t) {
    std::vector<cplx> acc(kObservableCount);
    cplx trace{};
    for (const auto& sec : sectors) {
      trace += sec.rho.trace();
      for (int o = 0; o < kObservableCount; ++o)
        for (const auto& e : sec.obs[o]) acc[o] += e.amp * sec.rho(e.col, e.row);
    }
    auto avg = [&](int o) {
      const auto count = products[o].size();
      return count == 0 ? cplx{} : acc[o] / static_cast<double>(count);
    };
    FockSample s;
    s.t = t;
    s.trace = trace.real();
    s.moments.C = avg(kC);
    s.moments.b = avg(kB);
    s.moments.n_b = avg(kNb).real();
    s.moments.n_si = avg(kNsi).real();
    s.moments.F = avg(kF);
    s.moments.G = avg(kG);
    s.moments.n_s = avg(kNs).real();
    s.moments.n_i = avg(kNi).real();
    if (std::abs(s.trace - 1.0) > 1e-6)
      throw std::runtime_error("fock_evolve: trace drift exceeds 1e-6 (reduce dt or raise truncation)");
    return s;
  };

  const long steps = std::max(1L, std::lround(config.t_final / config.dt));
  const double h = config.t_final / static_cast<double>(steps);
  const cplx minus_i{0.0, -1.0};
  auto deriv = [&](const Eigen::SparseMatrix<cplx>& H, const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd X = H * rho;
    return Eigen::MatrixXcd(minus_i * (X - X.adjoint()));
  };

  std::vector<FockSample> out;
  out.push_back(sample(0.0));
  for (long step = 1; step <= steps; ++step) {
    for (auto& sec : sectors) {
      const Eigen::MatrixXcd k1 = deriv(sec.H, sec.rho);
      const Eigen::MatrixXcd k2 = deriv(sec.H, sec.rho + 0.5 * h * k1);
      const Eigen::MatrixXcd k3 = deriv(sec.H, sec.rho + 0.5 * h * k2);
      const Eigen::MatrixXcd k4 = deriv(sec.H, sec.rho + h * k3);
      sec.rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (step % config.output_stride == 0 || step == steps) out.push_back(sample(step * h));
  }
  return out;
}

}  // namespace qisim
