// spectroscopy.hpp — drive operator with geometric phase symmetry, selection
// rules at avoided crossings, two-photon transition amplitudes, and synthesized
// spectroscopy maps.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "device.hpp"
#include "dispersive.hpp"
#include "transmon.hpp"

namespace cavex::spectroscopy {

// Microwave drive applied through the feedline.  symmetry is the relative sign
// of the drive field at the two qubit positions (+1 in phase, -1 out of phase).
struct DriveSpec {
  double amplitude = 0.0;  // GHz
  double f_d = 0.0;        // drive frequency, GHz
  int symmetry = +1;
};

// Relative sign of the drive field at the two qubit positions: sign of
// cos(2 pi f_d d / c_eff) with f_d in GHz converted to Hz.
inline int drive_symmetry(const DriveGeometry& geom, double f_d) {
  const double phase =
      2.0 * std::numbers::pi * (f_d * 1e9) * geom.qubit_separation / geom.c_eff;
  const double c = std::cos(phase);
  if (c == 0.0)
    throw ConfigError("drive frequency sits exactly on a symmetry change");
  return c > 0.0 ? +1 : -1;
}

// Frequencies (GHz, ascending) below f_max at which the drive symmetry flips:
// odd multiples of c_eff / (4 d).
inline std::vector<double> sign_change_frequencies(const DriveGeometry& geom,
                                                   double f_max) {
  std::vector<double> out;
  const double base = geom.c_eff / (4.0 * geom.qubit_separation) * 1e-9;
  for (int s = 1; base * s <= f_max; s += 2) out.push_back(base * s);
  return out;
}

// Two-qubit computational basis used for drive matrix elements, in this order:
// index 0 = both ground, 1 = qubit 1 excited, 2 = qubit 2 excited, 3 = both
// excited.
inline constexpr int idx_gg = 0;
inline constexpr int idx_e1 = 1;
inline constexpr int idx_e2 = 2;
inline constexpr int idx_ee = 3;

// Dispersive drive operator: each qubit is driven through its mode with weight
// |g|/delta, and the drive symmetry multiplies the qubit-2 weight:
//   H_d = eps * (|g1|/d1 * sigma_+^(1) + sym * |g2|/d2 * sigma_+^(2)) + h.c.
inline Eigen::Matrix4d drive_operator(const DriveSpec& drive, double g1, double g2,
                                      double delta1, double delta2) {
  if (drive.symmetry != 1 && drive.symmetry != -1)
    throw std::invalid_argument("drive symmetry must be +1 or -1");
  if (delta1 == 0.0 || delta2 == 0.0)
    throw ZeroDetuning("drive operator undefined at zero qubit-mode detuning");
  const double a1 = drive.amplitude * std::abs(g1) / delta1;
  const double a2 = drive.amplitude * double(drive.symmetry) * std::abs(g2) / delta2;
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(idx_e1, idx_gg) = a1;
  h(idx_ee, idx_e2) = a1;
  h(idx_e2, idx_gg) = a2;
  h(idx_ee, idx_e1) = a2;
  h(idx_gg, idx_e1) = a1;
  h(idx_e2, idx_ee) = a1;
  h(idx_gg, idx_e2) = a2;
  h(idx_e1, idx_ee) = a2;
  return h;
}

// Qubit-swap operator on the same four-state basis.
inline Eigen::Matrix4d qubit_swap_matrix() {
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p(idx_gg, idx_gg) = 1.0;
  p(idx_e1, idx_e2) = 1.0;
  p(idx_e2, idx_e1) = 1.0;
  p(idx_ee, idx_ee) = 1.0;
  return p;
}

enum class Branch { psi_plus, psi_minus };

inline const char* to_string(Branch b) {
  return b == Branch::psi_plus ? "psi_plus" : "psi_minus";
}

// Selection rule at a degenerate avoided crossing.  sign_gg is the sign of the
// coupling product g^(1) g^(2) of the dominant mode, sign_delta the sign of the
// common detuning, so their product is the sign of the exchange J.  The upper
// branch psi_plus is the symmetric qubit combination iff J > 0; the branch whose
// symmetry is opposite to the drive symmetry is dark.
inline Branch dark_branch(int sign_gg, int sign_delta, int drive_symmetry) {
  if (std::abs(sign_gg) != 1 || std::abs(sign_delta) != 1 ||
      std::abs(drive_symmetry) != 1)
    throw std::invalid_argument("signs must be +1 or -1");
  const bool psi_plus_symmetric = sign_gg * sign_delta > 0;
  const bool drive_symmetric = drive_symmetry > 0;
  return (psi_plus_symmetric == drive_symmetric) ? Branch::psi_minus
                                                 : Branch::psi_plus;
}

// One synthesized spectroscopy line.  dark marks intensities negligible
// relative to the strongest line of the same scan.
struct SpectrumLine {
  double f = 0.0;          // transition frequency, GHz
  double intensity = 0.0;  // |matrix element|^2, GHz^2
  std::string label;       // "psi_plus", "psi_minus", or "two_photon"
  bool dark = false;
};

inline constexpr double dark_relative_threshold = 1e-20;

namespace detail {

// Harmonic mode nearest to either qubit; its couplings and detunings feed the
// dispersive drive operator.
inline int nearest_mode(const DeviceSpec& dev, double f_ge1, double f_ge2) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dev.resonator.n_modes; ++j) {
    const double fm = dev.resonator.mode_freq(j);
    const double d = std::min(std::abs(f_ge1 - fm), std::abs(f_ge2 - fm));
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

inline Eigen::Matrix4d device_drive_operator(const DeviceSpec& dev, double f_ge1,
                                             double f_ge2, const DriveSpec& drive) {
  const int j = nearest_mode(dev, f_ge1, f_ge2);
  const double fm = dev.resonator.mode_freq(j);
  const double g1 = transmon::coupling_strength(dev.qubit1, dev.resonator, j, f_ge1);
  const double g2 = transmon::coupling_strength(dev.qubit2, dev.resonator, j, f_ge2);
  return drive_operator(drive, g1, g2, f_ge1 - fm, f_ge2 - fm);
}

inline void mark_dark(std::vector<SpectrumLine>& lines) {
  double max_i = 0.0;
  for (const SpectrumLine& l : lines) max_i = std::max(max_i, l.intensity);
  for (SpectrumLine& l : lines)
    l.dark = l.intensity < dark_relative_threshold * max_i;
}

}  // namespace detail

// Two-photon transition gg -> ee through the two single-excitation dressed
// states, with explicit exchange j and drive operator:
//   A = sum_m <ee|H_d|m><m|H_d|gg> / (E_m - f_d),  m = psi_plus, psi_minus.
// Energies are absolute (E_gg = 0), so E_m = (f_ge1 + f_ge2)/2 +- R/2.
inline double two_photon_amplitude(double j, double f_ge1, double f_ge2,
                                   const Eigen::Matrix4d& h_d, double f_d) {
  // Energies enter only through E_m - f_d; forming it as (f_mean - f_d) +- R/2
  // keeps the two paths exactly symmetric when the drive sits on the midpoint,
  // so their destructive cancellation survives at machine precision.
  const dispersive::TwoQubitEigenstates st =
      dispersive::eigenstates(j, f_ge1 - f_ge2, 0.0);
  const double mid_offset = 0.5 * (f_ge1 + f_ge2) - f_d;
  double amp = 0.0;
  for (int branch = 0; branch < 2; ++branch) {
    const Eigen::Vector2d& psi = branch == 0 ? st.psi_s : st.psi_a;
    const double denom = mid_offset + (branch == 0 ? st.e_s : st.e_a);
    if (std::abs(denom) < 1e-6)
      throw IntermediateStateResonance(
          "drive within 1e-6 GHz of an intermediate dressed state (gap " +
          std::to_string(denom) + " GHz)");
    const double up = psi[0] * h_d(idx_e1, idx_gg) + psi[1] * h_d(idx_e2, idx_gg);
    const double down = psi[0] * h_d(idx_ee, idx_e1) + psi[1] * h_d(idx_ee, idx_e2);
    amp += down * up / denom;
  }
  return amp;
}

// Device-level two-photon amplitude: exchange from the full mode sum, drive
// operator from the nearest harmonic mode.
inline double two_photon_amplitude(const DeviceSpec& dev, double f_ge1, double f_ge2,
                                   const DriveSpec& drive, double f_d,
                                   double guard = dispersive::default_guard) {
  const double j =
      dispersive::exchange_j(dev, f_ge1, f_ge2, dispersive::ModeSelection::all(dev),
                             guard)
          .j_total;
  const Eigen::Matrix4d h_d = detail::device_drive_operator(dev, f_ge1, f_ge2, drive);
  return two_photon_amplitude(j, f_ge1, f_ge2, h_d, f_d);
}

struct LineSpectrumOptions {
  bool two_photon = false;
  double two_photon_threshold = 0.0;  // minimum drive amplitude to synthesize it
  double guard = dispersive::default_guard;
};

// Single-photon lines to both dressed branches (and optionally the two-photon
// line at the midpoint) for qubits at f_ge1, f_ge2 under the given drive.
inline std::vector<SpectrumLine> line_spectrum(const DeviceSpec& dev, double f_ge1,
                                               double f_ge2, const DriveSpec& drive,
                                               const LineSpectrumOptions& opts = {}) {
  const double j =
      dispersive::exchange_j(dev, f_ge1, f_ge2, dispersive::ModeSelection::all(dev),
                             opts.guard)
          .j_total;
  const dispersive::TwoQubitEigenstates st =
      dispersive::eigenstates(j, f_ge1 - f_ge2, 0.5 * (f_ge1 + f_ge2));
  const Eigen::Matrix4d h_d = detail::device_drive_operator(dev, f_ge1, f_ge2, drive);

  std::vector<SpectrumLine> lines;
  const double el_s =
      st.psi_s[0] * h_d(idx_e1, idx_gg) + st.psi_s[1] * h_d(idx_e2, idx_gg);
  const double el_a =
      st.psi_a[0] * h_d(idx_e1, idx_gg) + st.psi_a[1] * h_d(idx_e2, idx_gg);
  lines.push_back({st.e_s, el_s * el_s, "psi_plus", false});
  lines.push_back({st.e_a, el_a * el_a, "psi_minus", false});

  if (opts.two_photon && drive.amplitude >= opts.two_photon_threshold) {
    const double f_mid = 0.5 * (f_ge1 + f_ge2);
    const double a = two_photon_amplitude(j, f_ge1, f_ge2, h_d, f_mid);
    lines.push_back({f_mid, a * a, "two_photon", false});
  }

  detail::mark_dark(lines);
  return lines;
}

// Synthesized two-dimensional spectroscopy map over a flux grid and a drive
// frequency grid, plus the underlying line list per flux point.
struct CrossingLine {
  double flux = 0.0;
  double f_ge2 = 0.0;      // probe-qubit frequency at this flux, GHz
  double f = 0.0;          // line frequency, GHz
  double intensity = 0.0;  // GHz^2 (single photon) or GHz^2 amplitude^2 (two photon)
  std::string label;
  bool dark = false;
};

struct CrossingMapOptions {
  double gamma_line = 0.002;  // Lorentzian half-width of synthesized lines, GHz
  bool two_photon = false;
  double two_photon_threshold = 0.0;  // minimum drive amplitude to include it
  double two_photon_floor = 0.1;      // line-list floor relative to its peak
  std::optional<double> j_override;   // fixed exchange instead of the device sum
  double guard = dispersive::default_guard;
};

struct CrossingMap {
  std::vector<double> flux;              // flux grid
  std::vector<double> f_drive;           // drive frequency grid, GHz
  std::vector<std::vector<double>> map;  // map[i][k]: flux i, drive frequency k
  std::vector<CrossingLine> lines;       // per-flux line list, flux-major order
};

inline CrossingMap crossing_map(const DeviceSpec& dev, const std::vector<double>& flux,
                                const FluxMap& fmap, double f_ge1,
                                const DriveSpec& drive,
                                const std::vector<double>& f_drive,
                                const CrossingMapOptions& opts = {}) {
  CrossingMap out;
  out.flux = flux;
  out.f_drive = f_drive;
  out.map.assign(flux.size(), std::vector<double>(f_drive.size(), 0.0));

  struct PerFlux {
    std::vector<SpectrumLine> lines;
    double f_ge2 = 0.0;
  };
  std::vector<PerFlux> rows(flux.size());

  const bool want_two_photon =
      opts.two_photon && drive.amplitude >= opts.two_photon_threshold;

  for (std::size_t i = 0; i < flux.size(); ++i) {
    const double f2 = transmon::map_flux(fmap, flux[i]);
    rows[i].f_ge2 = f2;
    const double j =
        opts.j_override
            ? *opts.j_override
            : dispersive::exchange_j(dev, f_ge1, f2,
                                     dispersive::ModeSelection::all(dev), opts.guard)
                  .j_total;
    const dispersive::TwoQubitEigenstates st =
        dispersive::eigenstates(j, f_ge1 - f2, 0.5 * (f_ge1 + f2));
    const Eigen::Matrix4d h_d = detail::device_drive_operator(dev, f_ge1, f2, drive);

    const double el_s =
        st.psi_s[0] * h_d(idx_e1, idx_gg) + st.psi_s[1] * h_d(idx_e2, idx_gg);
    const double el_a =
        st.psi_a[0] * h_d(idx_e1, idx_gg) + st.psi_a[1] * h_d(idx_e2, idx_gg);
    rows[i].lines.push_back({st.e_s, el_s * el_s, "psi_plus", false});
    rows[i].lines.push_back({st.e_a, el_a * el_a, "psi_minus", false});
    if (want_two_photon) {
      const double f_mid = 0.5 * (f_ge1 + f2);
      const double a = two_photon_amplitude(j, f_ge1, f2, h_d, f_mid);
      rows[i].lines.push_back({f_mid, a * a, "two_photon", false});
    }
  }

  // Dark flags are relative to the strongest single-photon line of the whole
  // scan; the two-photon line list keeps only points near its own peak, which
  // confines it to the neighborhood of the crossing.
  double max_single = 0.0, max_two = 0.0;
  for (const PerFlux& r : rows)
    for (const SpectrumLine& l : r.lines) {
      if (l.label == "two_photon")
        max_two = std::max(max_two, l.intensity);
      else
        max_single = std::max(max_single, l.intensity);
    }

  for (std::size_t i = 0; i < flux.size(); ++i) {
    for (const SpectrumLine& l : rows[i].lines) {
      for (std::size_t k = 0; k < f_drive.size(); ++k) {
        const double d = f_drive[k] - l.f;
        out.map[i][k] += l.intensity * opts.gamma_line * opts.gamma_line /
                         (d * d + opts.gamma_line * opts.gamma_line);
      }
      if (l.label == "two_photon" &&
          l.intensity < opts.two_photon_floor * max_two)
        continue;
      CrossingLine cl;
      cl.flux = flux[i];
      cl.f_ge2 = rows[i].f_ge2;
      cl.f = l.f;
      cl.intensity = l.intensity;
      cl.label = l.label;
      cl.dark = l.label != "two_photon" &&
                l.intensity < dark_relative_threshold * max_single;
      out.lines.push_back(cl);
    }
  }
  return out;
}

}  // namespace cavex::spectroscopy
