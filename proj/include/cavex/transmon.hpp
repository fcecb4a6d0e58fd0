// transmon.hpp — flux-to-frequency map and frequency-dependent mode couplings.
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "device.hpp"

namespace cavex::transmon {

// Transition frequency of a flux-tunable transmon, flux in units of the flux
// quantum.  Even and periodic in flux.  Near half-integer flux the junction
// energy vanishes and the two-level description breaks down.
inline double transition_frequency(const QubitSpec& q, double flux) {
  const double c = std::abs(std::cos(std::numbers::pi * flux));
  if (c <= 1e-6)
    throw FluxSweetSpotSingularity(
        "transition frequency undefined near half-integer flux (flux = " +
        std::to_string(flux) + ")");
  return std::sqrt(8.0 * q.ec * q.ej_max * c) - q.ec;
}

// Sign of a qubit's coupling to harmonic mode j.  A qubit at the left end sees
// every mode with the same sign; at the right end the mode field alternates,
// so the sign is (-1)^(j+1).
inline double coupling_sign(End end, int j) {
  if (end == End::left) return +1.0;
  return (j % 2 == 0) ? -1.0 : +1.0;
}

// Signed coupling of a qubit to harmonic mode j at transition frequency f_ge.
// Magnitude grows as sqrt(j+1) with the mode index and as sqrt(f_ge) with the
// qubit frequency; g0 anchors the law at the fundamental, on resonance with it.
inline double coupling_strength(const QubitSpec& q, const ResonatorSpec& res, int j,
                                double f_ge) {
  if (j < 0 || j >= res.n_modes)
    throw ModeIndexOutOfRange("mode index " + std::to_string(j) +
                              " outside modeled range [0, " +
                              std::to_string(res.n_modes - 1) + "]");
  if (!(f_ge > 0.0)) throw std::invalid_argument("f_ge must be > 0");
  return coupling_sign(q.end, j) * q.g0 * std::sqrt(double(j + 1)) *
         std::sqrt(f_ge / res.f0);
}

// Coupling magnitude of a spurious resonance: the harmonic law evaluated at the
// resonance frequency, scaled by the mode's g_ratio.
inline double spurious_coupling_magnitude(const QubitSpec& q, const ResonatorSpec& res,
                                          const SpuriousModeSpec& sp, double f_ge) {
  if (!(f_ge > 0.0)) throw std::invalid_argument("f_ge must be > 0");
  return sp.g_ratio * q.g0 * std::sqrt(sp.freq / res.f0) * std::sqrt(f_ge / res.f0);
}

// Signed couplings of both qubits to every harmonic mode at the given
// transition frequencies.
struct CouplingTable {
  int n_modes = 0;
  std::vector<double> g1;  // signed coupling of qubit 1 per mode, GHz
  std::vector<double> g2;  // signed coupling of qubit 2 per mode, GHz

  double g(int qubit, int j) const { return qubit == 1 ? g1.at(j) : g2.at(j); }
};

inline CouplingTable coupling_table(const DeviceSpec& dev, double f_ge1, double f_ge2) {
  CouplingTable t;
  t.n_modes = dev.resonator.n_modes;
  t.g1.reserve(t.n_modes);
  t.g2.reserve(t.n_modes);
  for (int j = 0; j < t.n_modes; ++j) {
    t.g1.push_back(coupling_strength(dev.qubit1, dev.resonator, j, f_ge1));
    t.g2.push_back(coupling_strength(dev.qubit2, dev.resonator, j, f_ge2));
  }
  return t;
}

// Least-squares slope of measured coupling magnitudes against (j + 1), through
// the origin: fits |g_j| = slope * (j + 1) for qubits probed on resonance with
// each mode.  Residuals are measured minus fitted, in input units.
struct CouplingScaleFit {
  double slope = 0.0;
  std::vector<double> residuals;
};

inline CouplingScaleFit fit_coupling_scale(
    const std::vector<std::pair<int, double>>& measured) {
  if (measured.size() < 2)
    throw InsufficientData("coupling-scale fit needs at least 2 modes, got " +
                           std::to_string(measured.size()));
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [j, g] : measured) {
    const double x = double(j + 1);
    sxy += x * g;
    sxx += x * x;
  }
  CouplingScaleFit fit;
  fit.slope = sxy / sxx;
  fit.residuals.reserve(measured.size());
  for (const auto& [j, g] : measured)
    fit.residuals.push_back(g - fit.slope * double(j + 1));
  return fit;
}

// Evaluate a flux map at coordinate x.
inline double map_flux(const FluxMap& m, double x) {
  if (m.kind == FluxMap::Kind::linear) return m.slope * x + m.offset;
  return transition_frequency(m.qubit, x);
}

}  // namespace cavex::transmon
