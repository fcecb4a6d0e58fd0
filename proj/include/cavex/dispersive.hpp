// dispersive.hpp — perturbative exchange coupling, two-qubit mixing, and the
// avoided-crossing branch model.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "device.hpp"
#include "transmon.hpp"

namespace cavex::dispersive {

inline constexpr double default_guard = 3.0;

// Identifies one exchange channel: a harmonic mode index or a spurious mode index.
struct ModeId {
  enum class Kind { harmonic, spurious };
  Kind kind = Kind::harmonic;
  int index = 0;

  std::string label() const {
    return (kind == Kind::harmonic ? "harmonic:" : "spurious:") + std::to_string(index);
  }
};

// Contribution of one mode to the exchange sum, with the ingredients it was
// built from: signed couplings, per-qubit detunings, and per-qubit cavity pulls.
struct ModeTerm {
  ModeId id;
  double g1 = 0.0, g2 = 0.0;          // signed couplings, GHz
  double delta1 = 0.0, delta2 = 0.0;  // qubit-minus-mode detunings, GHz
  double pull1 = 0.0, pull2 = 0.0;    // g^2/delta per qubit, GHz
  double value = 0.0;                 // exchange contribution, GHz
};

struct DispersiveResult {
  double j_total = 0.0;  // GHz; equals the sum of per_mode_terms values
  std::vector<ModeTerm> per_mode_terms;
};

// Which exchange channels to include in a sum.
struct ModeSelection {
  std::vector<int> harmonic;      // harmonic mode indices
  bool include_spurious = false;  // include every spurious mode of the device

  static ModeSelection all(const DeviceSpec& dev) {
    ModeSelection s;
    s.harmonic.resize(dev.resonator.n_modes);
    for (int j = 0; j < dev.resonator.n_modes; ++j) s.harmonic[j] = j;
    s.include_spurious = true;
    return s;
  }
  static ModeSelection harmonic_only(const DeviceSpec& dev) {
    ModeSelection s = all(dev);
    s.include_spurious = false;
    return s;
  }
  static ModeSelection first_n(int n) {
    ModeSelection s;
    s.harmonic.resize(n);
    for (int j = 0; j < n; ++j) s.harmonic[j] = j;
    return s;
  }
};

namespace detail {

inline void check_guard(double delta, double g, double guard, const std::string& what,
                        const std::string& qubit) {
  if (delta == 0.0)
    throw DispersiveBreakdown(what + ": " + qubit + " exactly resonant with the mode");
  if (!(std::abs(delta) > guard * std::abs(g)))
    throw DispersiveBreakdown(what + ": " + qubit + " detuning " +
                              std::to_string(delta) + " GHz within guard (" +
                              std::to_string(guard) + " x |g| = " +
                              std::to_string(guard * std::abs(g)) + " GHz)");
}

}  // namespace detail

// Second-order exchange between the qubits at transition frequencies f_ge1 and
// f_ge2, summed over the selected virtual-photon channels:
//   J = 1/2 * sum_m g_m^(1) g_m^(2) (1/delta_m^(1) + 1/delta_m^(2)).
// Every detuning used must exceed guard times the corresponding coupling
// magnitude, otherwise the perturbative treatment has broken down.
inline DispersiveResult exchange_j(const DeviceSpec& dev, double f_ge1, double f_ge2,
                                   const ModeSelection& sel,
                                   double guard = default_guard) {
  DispersiveResult res;
  for (int j : sel.harmonic) {
    ModeTerm t;
    t.id = {ModeId::Kind::harmonic, j};
    t.g1 = transmon::coupling_strength(dev.qubit1, dev.resonator, j, f_ge1);
    t.g2 = transmon::coupling_strength(dev.qubit2, dev.resonator, j, f_ge2);
    const double fm = dev.resonator.mode_freq(j);
    t.delta1 = f_ge1 - fm;
    t.delta2 = f_ge2 - fm;
    const std::string what = "harmonic mode " + std::to_string(j);
    detail::check_guard(t.delta1, t.g1, guard, what, "qubit 1");
    detail::check_guard(t.delta2, t.g2, guard, what, "qubit 2");
    t.pull1 = t.g1 * t.g1 / t.delta1;
    t.pull2 = t.g2 * t.g2 / t.delta2;
    t.value = 0.5 * t.g1 * t.g2 * (1.0 / t.delta1 + 1.0 / t.delta2);
    res.per_mode_terms.push_back(t);
  }
  if (sel.include_spurious) {
    for (std::size_t l = 0; l < dev.spurious.size(); ++l) {
      const SpuriousModeSpec& sp = dev.spurious[l];
      ModeTerm t;
      t.id = {ModeId::Kind::spurious, int(l)};
      // The relative sign between the qubits is the mode's sign rule; it is
      // carried on the qubit-2 coupling by convention.
      t.g1 = transmon::spurious_coupling_magnitude(dev.qubit1, dev.resonator, sp, f_ge1);
      t.g2 = double(sp.sign_rule) *
             transmon::spurious_coupling_magnitude(dev.qubit2, dev.resonator, sp, f_ge2);
      t.delta1 = f_ge1 - sp.freq;
      t.delta2 = f_ge2 - sp.freq;
      const std::string what = "spurious mode " + std::to_string(l);
      detail::check_guard(t.delta1, t.g1, guard, what, "qubit 1");
      detail::check_guard(t.delta2, t.g2, guard, what, "qubit 2");
      t.pull1 = t.g1 * t.g1 / t.delta1;
      t.pull2 = t.g2 * t.g2 / t.delta2;
      t.value = 0.5 * t.g1 * t.g2 * (1.0 / t.delta1 + 1.0 / t.delta2);
      res.per_mode_terms.push_back(t);
    }
  }
  double sum = 0.0;
  for (const ModeTerm& t : res.per_mode_terms) sum += t.value;
  res.j_total = sum;
  return res;
}

// Convenience overload: every channel the device models, default guard.
inline DispersiveResult exchange_j(const DeviceSpec& dev, double f_ge1, double f_ge2) {
  return exchange_j(dev, f_ge1, f_ge2, ModeSelection::all(dev));
}

// Partial harmonic sums for degenerate qubits (f_ge1 = f_ge2 = f_ge): the sum
// truncated after an even mode index (j = 0..2k) and after the next odd one
// (j = 0..2k+1).  Their difference exposes the slow alternating convergence of
// the mode sum.  Requires 2k+2 modeled modes.
struct PartialSums {
  DispersiveResult even;  // harmonic modes j = 0..2k
  DispersiveResult odd;   // harmonic modes j = 0..2k+1
};

inline int max_partial_k(const DeviceSpec& dev) {
  return dev.resonator.n_modes / 2 - 1;
}

inline PartialSums partial_sums(const DeviceSpec& dev, double f_ge, int k_max,
                                double guard = default_guard) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  if (2 * k_max + 2 > dev.resonator.n_modes)
    throw ModeIndexOutOfRange("partial sums need " + std::to_string(2 * k_max + 2) +
                              " modes, device models " +
                              std::to_string(dev.resonator.n_modes));
  PartialSums ps;
  ps.even = exchange_j(dev, f_ge, f_ge, ModeSelection::first_n(2 * k_max + 1), guard);
  ps.odd = exchange_j(dev, f_ge, f_ge, ModeSelection::first_n(2 * k_max + 2), guard);
  return ps;
}

// Full exchange for degenerate qubits: every harmonic mode plus every spurious
// mode of the device.
inline DispersiveResult exchange_j_total(const DeviceSpec& dev, double f_ge,
                                         double guard = default_guard) {
  return exchange_j(dev, f_ge, f_ge, ModeSelection::all(dev), guard);
}

// Eigenstates of the exchange-coupled two-qubit block.  In the single-excitation
// basis (excitation on qubit 1, excitation on qubit 2) the block reads
//   [[ delta_q/2, J ], [ J, -delta_q/2 ]]  + f_mean * identity,
// with delta_q = f_ge1 - f_ge2.  psi_s is always the upper branch (energy
// f_mean + R/2, R = sqrt(4 J^2 + delta_q^2)) and psi_a the lower one.
struct TwoQubitEigenstates {
  double theta = 0.0;       // mixing angle, radians
  Eigen::Vector2d psi_s;    // upper-branch amplitudes (qubit-1, qubit-2 excitation)
  Eigen::Vector2d psi_a;    // lower-branch amplitudes
  double e_s = 0.0;         // upper-branch energy, GHz
  double e_a = 0.0;         // lower-branch energy, GHz
};

inline TwoQubitEigenstates eigenstates(double j, double delta_q, double f_mean = 0.0) {
  if (j == 0.0 && delta_q == 0.0)
    throw DegenerateUncoupled("mixing angle undefined at j = 0, delta_q = 0");
  const double r = std::hypot(2.0 * j, delta_q);
  TwoQubitEigenstates st;
  st.theta = 0.5 * std::atan2(2.0 * j, -delta_q);
  st.psi_s = {std::sin(st.theta), std::cos(st.theta)};
  st.psi_a = {std::cos(st.theta), -std::sin(st.theta)};
  st.e_s = f_mean + 0.5 * r;
  st.e_a = f_mean - 0.5 * r;
  return st;
}

// Avoided-crossing branch frequencies when a probe line at f_probe crosses a
// fixed line at f_ge1 with exchange j:
//   f_pm = ((f_probe + f_ge1) +- sqrt((f_ge1 - f_probe)^2 + 4 j^2)) / 2.
// The lower branch is formed as sum - upper so the two add to the trace exactly.
inline std::pair<double, double> branch_frequencies(double f_probe, double f_ge1,
                                                    double j) {
  const double sum = f_probe + f_ge1;
  const double disc = std::hypot(f_ge1 - f_probe, 2.0 * j);
  const double upper = 0.5 * (sum + disc);
  const double lower = sum - upper;
  return {upper, lower};
}

// Dispersive frequency pull of one mode by one qubit.
inline double cavity_pull(double g, double delta) {
  if (delta == 0.0) throw ZeroDetuning("cavity pull undefined at zero detuning");
  return g * g / delta;
}

}  // namespace cavex::dispersive
