// device.hpp — device description types, validation, and bundled sample presets.
//
// Conventions used throughout the library:
//   * all frequencies, couplings, linewidths are linear frequencies in GHz;
//   * harmonic mode j of the resonator sits at (j + 1) * f0, j = 0, 1, ...;
//   * the relative sign of the two qubits' couplings to mode j alternates with j
//     because the mode field has opposite parity at the two resonator ends.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cavex {

enum class End { left, right };

inline const char* to_string(End e) { return e == End::left ? "left" : "right"; }

// Harmonic mode ladder of a transmission-line resonator.
struct ResonatorSpec {
  double f0 = 0.0;     // fundamental mode frequency, GHz
  double kappa = 0.0;  // photon decay rate, GHz
  int n_modes = 1;     // number of harmonic modes kept in the model
  std::string mode_sign_rule = "alternating";  // sign of g_j^(1) g_j^(2): (-1)^(j+1)

  double mode_freq(int j) const { return (j + 1) * f0; }
};

struct QubitSpec {
  double ec = 0.0;      // charging energy, GHz
  double ej_max = 0.0;  // maximum Josephson energy, GHz
  double g0 = 0.0;      // coupling to the fundamental mode when tuned to it, GHz
  End end = End::left;  // which resonator end the qubit sits at
};

// Extra (non-ladder) electromagnetic resonance that opens a further exchange channel.
struct SpuriousModeSpec {
  double freq = 0.0;     // resonance frequency, GHz
  double g_ratio = 0.0;  // coupling magnitude relative to the harmonic law at freq
  int sign_rule = +1;    // relative sign of the two qubits' couplings to this mode
};

// Geometry needed to derive the drive-phase symmetry at the two qubit positions.
struct DriveGeometry {
  double qubit_separation = 0.0;  // effective qubit separation, meters
  double c_eff = 0.0;             // effective propagation velocity, m/s
};

struct DeviceSpec {
  ResonatorSpec resonator;
  QubitSpec qubit1;
  QubitSpec qubit2;
  std::vector<SpuriousModeSpec> spurious;  // may be empty
  DriveGeometry geometry;
};

// Map from a flux-bias coordinate to a qubit transition frequency.  The linear
// kind is a local expansion used in fits; the transmon kind applies the full
// flux dependence of a split-junction qubit.
struct FluxMap {
  enum class Kind { linear, transmon };
  Kind kind = Kind::linear;
  double slope = 0.0;   // GHz per flux unit (linear kind)
  double offset = 0.0;  // GHz at zero coordinate (linear kind)
  QubitSpec qubit;      // parameters used by the transmon kind
};

// One failed validation rule.  Warnings flag assumptions that are strained but
// not outright broken (e.g. a small ej_max/ec ratio).
struct Violation {
  std::string field;
  std::string rule;
  bool warning = false;
};

inline std::vector<Violation> validate_device(const DeviceSpec& dev) {
  std::vector<Violation> out;
  auto bad = [&out](const std::string& field, const std::string& rule) {
    out.push_back({field, rule, false});
  };
  auto warn = [&out](const std::string& field, const std::string& rule) {
    out.push_back({field, rule, true});
  };

  const ResonatorSpec& r = dev.resonator;
  if (!(r.f0 > 0.0)) bad("resonator.f0", "must be > 0");
  if (!(r.kappa > 0.0)) bad("resonator.kappa", "must be > 0");
  if (r.n_modes < 1) bad("resonator.n_modes", "must be >= 1");
  if (r.mode_sign_rule != "alternating")
    bad("resonator.mode_sign_rule", "only \"alternating\" is supported");

  auto check_qubit = [&](const QubitSpec& q, const std::string& name) {
    if (!(q.ec > 0.0)) bad(name + ".ec", "must be > 0");
    if (!(q.ej_max > 0.0)) bad(name + ".ej_max", "must be > 0");
    if (!(q.g0 > 0.0)) bad(name + ".g0", "must be > 0");
    if (q.ec > 0.0 && q.ej_max > 0.0 && q.ej_max / q.ec < 20.0)
      warn(name + ".ej_max", "ej_max/ec < 20 strains the transmon approximation");
  };
  check_qubit(dev.qubit1, "qubit1");
  check_qubit(dev.qubit2, "qubit2");

  if (dev.qubit1.end == dev.qubit2.end)
    bad("qubit2.end", "qubits must sit at opposite resonator ends");

  for (std::size_t l = 0; l < dev.spurious.size(); ++l) {
    const SpuriousModeSpec& sp = dev.spurious[l];
    const std::string name = "spurious[" + std::to_string(l) + "]";
    if (!(sp.freq > 0.0)) bad(name + ".freq", "must be > 0");
    if (!(sp.g_ratio >= 0.0)) bad(name + ".g_ratio", "must be >= 0");
    if (sp.sign_rule != 1 && sp.sign_rule != -1)
      bad(name + ".sign_rule", "must be +1 or -1");
  }

  if (!(dev.geometry.qubit_separation > 0.0))
    bad("geometry.qubit_separation", "must be > 0");
  if (!(dev.geometry.c_eff > 0.0)) bad("geometry.c_eff", "must be > 0");

  return out;
}

// Bundled sample devices.  Sample A: a short resonator with strongly coupled
// qubits; sample B: a long resonator with many modes and four spurious
// resonances.  The geometry places the qubits a full resonator length apart.
inline DeviceSpec sample_a() {
  DeviceSpec dev;
  dev.resonator = {6.44, 0.00157, 4, "alternating"};
  dev.qubit1 = {0.232, 35.0, 0.133, End::left};
  dev.qubit2 = {0.233, 38.0, 0.134, End::right};
  dev.geometry.c_eff = 1.2e8;
  dev.geometry.qubit_separation = dev.geometry.c_eff / (2.0 * dev.resonator.f0 * 1e9);
  return dev;
}

inline DeviceSpec sample_b() {
  DeviceSpec dev;
  dev.resonator = {3.34, 0.00191, 8, "alternating"};
  dev.qubit1 = {0.148, 409.0, 0.043, End::left};
  dev.qubit2 = {0.153, 375.0, 0.042, End::right};
  dev.spurious = {
      {5.2, 1.0, +1},
      {8.4, 0.5, -1},
      {11.9, 0.8, +1},
      {14.8, 0.7, -1},
  };
  dev.geometry.c_eff = 1.2e8;
  dev.geometry.qubit_separation = dev.geometry.c_eff / (2.0 * dev.resonator.f0 * 1e9);
  return dev;
}

}  // namespace cavex
