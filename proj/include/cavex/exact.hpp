// exact.hpp — excitation-conserving Hamiltonian on a truncated photon ladder,
// block diagonalization, and exact observables used to cross-check the
// perturbative exchange model.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "device.hpp"
#include "dispersive.hpp"
#include "transmon.hpp"

namespace cavex::exact {

// One product basis state: qubit occupations (0 = ground, 1 = excited) and a
// photon count per modeled harmonic mode.
struct BasisState {
  int q1 = 0;
  int q2 = 0;
  std::vector<int> photons;

  int n_exc() const {
    int n = q1 + q2;
    for (int p : photons) n += p;
    return n;
  }
};

inline bool operator==(const BasisState& a, const BasisState& b) {
  return a.q1 == b.q1 && a.q2 == b.q2 && a.photons == b.photons;
}

namespace detail {

inline std::tuple<int, int, int, const std::vector<int>&> key(const BasisState& s) {
  return {s.n_exc(), s.q1, s.q2, s.photons};
}

inline bool state_less(const BasisState& a, const BasisState& b) {
  return key(a) < key(b);
}

}  // namespace detail

// Deterministically ordered enumeration of the truncated product space:
// states sorted by (total excitation number, q1, q2, photon tuple).
struct Basis {
  int n_modes = 0;
  int n_max = 0;
  std::vector<BasisState> states;

  std::size_t size() const { return states.size(); }

  // Index of a state; the basis is sorted, so this is a binary search.
  std::size_t index_of(const BasisState& s) const {
    auto it = std::lower_bound(states.begin(), states.end(), s, detail::state_less);
    if (it == states.end() || !(*it == s))
      throw std::out_of_range("state not in basis");
    return std::size_t(it - states.begin());
  }

  // Index of the state with the two qubit occupations exchanged.
  std::size_t swap_index(std::size_t i) const {
    BasisState s = states.at(i);
    std::swap(s.q1, s.q2);
    return index_of(s);
  }
};

inline Basis enumerate_basis(int n_modes, int n_max) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  Basis b;
  b.n_modes = n_modes;
  b.n_max = n_max;
  std::vector<int> photons(n_modes, 0);
  for (;;) {
    for (int q1 = 0; q1 <= 1; ++q1)
      for (int q2 = 0; q2 <= 1; ++q2) b.states.push_back({q1, q2, photons});
    // Odometer increment over the photon tuple.
    int j = n_modes - 1;
    while (j >= 0 && photons[j] == n_max) photons[j--] = 0;
    if (j < 0) break;
    ++photons[j];
  }
  std::sort(b.states.begin(), b.states.end(), detail::state_less);
  return b;
}

struct Hamiltonian {
  Basis basis;
  Eigen::MatrixXd h;  // dense, symmetric, GHz
};

inline constexpr int default_dim_cap = 4096;

// Excitation-conserving Hamiltonian: qubit splittings, harmonic mode energies,
// and photon-exchange couplings g_j^(i) (a_j sigma_+^(i) + h.c.).  qubit2_sign
// globally multiplies every qubit-2 coupling; flipping it is a gauge change
// (equivalent to negating the qubit-2 excited amplitudes) that must leave all
// spectra unchanged.
inline Hamiltonian build_hamiltonian(const DeviceSpec& dev, double f_ge1, double f_ge2,
                                     int n_max, int n_modes,
                                     int dim_cap = default_dim_cap,
                                     double qubit2_sign = +1.0) {
  if (n_modes < 1 || n_modes > dev.resonator.n_modes)
    throw ModeIndexOutOfRange("n_modes must be in [1, " +
                              std::to_string(dev.resonator.n_modes) + "], got " +
                              std::to_string(n_modes));
  double dim = 4.0;
  for (int j = 0; j < n_modes; ++j) dim *= double(n_max + 1);
  if (dim > double(dim_cap))
    throw DimensionCap("basis dimension " + std::to_string(std::llround(dim)) +
                       " exceeds cap " + std::to_string(dim_cap));

  Hamiltonian ham;
  ham.basis = enumerate_basis(n_modes, n_max);
  const std::size_t n = ham.basis.size();
  ham.h = Eigen::MatrixXd::Zero(n, n);

  std::vector<double> g1(n_modes), g2(n_modes);
  for (int j = 0; j < n_modes; ++j) {
    g1[j] = transmon::coupling_strength(dev.qubit1, dev.resonator, j, f_ge1);
    g2[j] = qubit2_sign *
            transmon::coupling_strength(dev.qubit2, dev.resonator, j, f_ge2);
  }

  for (std::size_t s = 0; s < n; ++s) {
    const BasisState& st = ham.basis.states[s];
    double diag = f_ge1 * (st.q1 - 0.5) + f_ge2 * (st.q2 - 0.5);
    for (int j = 0; j < n_modes; ++j)
      diag += st.photons[j] * dev.resonator.mode_freq(j);
    ham.h(s, s) = diag;

    // Photon emission by each excited qubit; each coupled pair is visited once
    // from its qubit-excited side, and both symmetric entries are set.
    for (int qubit = 1; qubit <= 2; ++qubit) {
      const int occ = qubit == 1 ? st.q1 : st.q2;
      if (occ != 1) continue;
      for (int j = 0; j < n_modes; ++j) {
        if (st.photons[j] >= n_max) continue;
        BasisState target = st;
        (qubit == 1 ? target.q1 : target.q2) = 0;
        ++target.photons[j];
        const std::size_t t = ham.basis.index_of(target);
        const double el =
            (qubit == 1 ? g1[j] : g2[j]) * std::sqrt(double(st.photons[j] + 1));
        ham.h(t, s) = el;
        ham.h(s, t) = el;
      }
    }
  }
  return ham;
}

// Adiabatically eliminated (dispersive) Hamiltonian on the two-qubit sector:
// qubit splittings plus the exchange term j (sigma_+^(1) sigma_-^(2) + h.c.);
// the photon factor is trivial.  Its eigenstates carry the permutation-symmetry
// curve: the qubit-like branches have <P> = +-sin(2 theta), while the gg and ee
// states stay symmetric (<P> = +1) at every detuning.
inline Hamiltonian build_exchange_hamiltonian(double j, double f_ge1, double f_ge2) {
  Hamiltonian ham;
  ham.basis = enumerate_basis(1, 0);  // four states, zero-photon sector only
  const std::size_t n = ham.basis.size();
  ham.h = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < n; ++s) {
    const BasisState& st = ham.basis.states[s];
    ham.h(s, s) = f_ge1 * (st.q1 - 0.5) + f_ge2 * (st.q2 - 0.5);
  }
  const std::size_t i_eg = ham.basis.index_of({1, 0, {0}});
  const std::size_t i_ge = ham.basis.index_of({0, 1, {0}});
  ham.h(i_eg, i_ge) = j;
  ham.h(i_ge, i_eg) = j;
  return ham;
}

// Eigendecomposition of one excitation block.
struct EigenBlock {
  int n_exc = 0;                   // excitation number labeling the block
  std::vector<std::size_t> basis_index;  // full-basis index per block row
  Eigen::VectorXd eigenvalues;     // ascending, GHz
  Eigen::MatrixXd eigenvectors;    // column k = eigenvector k over block rows
};

struct EigenSolution {
  std::vector<EigenBlock> blocks;  // ascending in n_exc

  // Eigenvector of (block b, column k) embedded in the full basis.
  Eigen::VectorXd full_vector(std::size_t b, int k, std::size_t basis_size) const {
    const EigenBlock& blk = blocks.at(b);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(basis_size);
    for (std::size_t r = 0; r < blk.basis_index.size(); ++r)
      v[blk.basis_index[r]] = blk.eigenvectors(r, k);
    return v;
  }
};

// Block with the given excitation number (throws if the solution has none).
inline const EigenBlock& block_for(const EigenSolution& sol, int n_exc) {
  for (const EigenBlock& b : sol.blocks)
    if (b.n_exc == n_exc) return b;
  throw std::out_of_range("no block with excitation number " + std::to_string(n_exc));
}

inline EigenSolution eigensolve(const Hamiltonian& ham) {
  const std::size_t n = ham.basis.size();
  int max_exc = 0;
  for (const BasisState& s : ham.basis.states) max_exc = std::max(max_exc, s.n_exc());

  EigenSolution sol;
  for (int exc = 0; exc <= max_exc; ++exc) {
    EigenBlock blk;
    blk.n_exc = exc;
    for (std::size_t i = 0; i < n; ++i)
      if (ham.basis.states[i].n_exc() == exc) blk.basis_index.push_back(i);
    if (blk.basis_index.empty()) continue;

    const std::size_t m = blk.basis_index.size();
    Eigen::MatrixXd sub(m, m);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c)
        sub(r, c) = ham.h(blk.basis_index[r], blk.basis_index[c]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    if (es.info() != Eigen::Success)
      throw ConvergenceFailure("eigensolve failed on excitation block " +
                               std::to_string(exc));
    blk.eigenvalues = es.eigenvalues();
    blk.eigenvectors = es.eigenvectors();
    sol.blocks.push_back(std::move(blk));
  }
  return sol;
}

// Exact exchange splitting for degenerate qubits: both qubits at f_ge, solve the
// single-excitation block, identify the two dressed states that live mostly in
// the qubit pair subspace, and return their energy gap (equals 2|J| in the
// dispersive limit).  The dispersive guard is enforced on every modeled mode
// first, so requests inside a mode's strong-coupling window fail loudly.
inline double effective_splitting(const DeviceSpec& dev, double f_ge, int n_max,
                                  int n_modes, double guard = dispersive::default_guard,
                                  int dim_cap = default_dim_cap) {
  // Reuse the dispersive guard checks (result discarded).
  dispersive::exchange_j(dev, f_ge, f_ge, dispersive::ModeSelection::first_n(n_modes),
                         guard);

  const Hamiltonian ham = build_hamiltonian(dev, f_ge, f_ge, n_max, n_modes, dim_cap);
  const EigenSolution sol = eigensolve(ham);

  const EigenBlock* one = nullptr;
  for (const EigenBlock& b : sol.blocks)
    if (b.n_exc == 1) one = &b;
  if (one == nullptr) throw StateIdentificationAmbiguous("no single-excitation block");

  BasisState eg{1, 0, std::vector<int>(n_modes, 0)};
  BasisState ge{0, 1, std::vector<int>(n_modes, 0)};
  const std::size_t i_eg = ham.basis.index_of(eg);
  const std::size_t i_ge = ham.basis.index_of(ge);
  std::size_t r_eg = 0, r_ge = 0;
  for (std::size_t r = 0; r < one->basis_index.size(); ++r) {
    if (one->basis_index[r] == i_eg) r_eg = r;
    if (one->basis_index[r] == i_ge) r_ge = r;
  }

  std::vector<int> hits;
  for (int k = 0; k < one->eigenvalues.size(); ++k) {
    const double w = one->eigenvectors(r_eg, k) * one->eigenvectors(r_eg, k) +
                     one->eigenvectors(r_ge, k) * one->eigenvectors(r_ge, k);
    if (w > 0.5) hits.push_back(k);
  }
  if (hits.size() != 2)
    throw StateIdentificationAmbiguous(
        "expected 2 qubit-like dressed states, found " + std::to_string(hits.size()));
  return std::abs(one->eigenvalues[hits[1]] - one->eigenvalues[hits[0]]);
}

// Expectation value of the qubit-swap operator in a normalized state given by
// amplitudes over the basis.  +1 for symmetric states, -1 for antisymmetric.
inline double permutation_expectation(const Eigen::VectorXd& amplitudes,
                                      const Basis& basis) {
  if (std::size_t(amplitudes.size()) != basis.size())
    throw std::invalid_argument("amplitude vector does not match basis size");
  const double norm2 = amplitudes.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-9)
    throw NotNormalized("state norm^2 = " + std::to_string(norm2));
  double acc = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    acc += amplitudes[i] * amplitudes[basis.swap_index(i)];
  return acc;
}

}  // namespace cavex::exact
