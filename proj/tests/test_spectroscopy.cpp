#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cavex/device.hpp"
#include "cavex/dispersive.hpp"
#include "cavex/errors.hpp"
#include "cavex/spectroscopy.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Single-mode device with identical qubits, so equal detunings give exactly
// equal drive weights on the two qubits.
cavex::DeviceSpec symmetric_instance() {
  cavex::DeviceSpec dev;
  dev.resonator = {10.0, 0.001, 1, "alternating"};
  dev.qubit1 = {0.25, 30.0, 0.1, cavex::End::left};
  dev.qubit2 = {0.25, 30.0, 0.1, cavex::End::right};
  dev.geometry = {1.2e8 / (2.0 * 10.0e9), 1.2e8};
  return dev;
}

const cavex::spectroscopy::SpectrumLine& find_line(
    const std::vector<cavex::spectroscopy::SpectrumLine>& lines,
    const std::string& label) {
  for (const auto& l : lines)
    if (l.label == label) return l;
  FAIL("no line labeled " + label);
  return lines.front();
}

}  // namespace

TEST_CASE("drive symmetry follows the standing-wave parity at the qubits") {
  const cavex::DriveGeometry geom = cavex::sample_a().geometry;
  CHECK(cavex::spectroscopy::drive_symmetry(geom, 3.0) == +1);
  CHECK(cavex::spectroscopy::drive_symmetry(geom, 5.21) == -1);
  CHECK(cavex::spectroscopy::drive_symmetry(geom, 6.44) == -1);
  CHECK(cavex::spectroscopy::drive_symmetry(geom, 12.88) == +1);

  SECTION("sign changes at odd multiples of a quarter wavelength condition") {
    const auto flips = cavex::spectroscopy::sign_change_frequencies(geom, 17.0);
    REQUIRE(flips.size() == 3);
    CHECK_THAT(flips[0], WithinRel(3.22, 1e-12));
    CHECK_THAT(flips[1], WithinRel(9.66, 1e-12));
    CHECK_THAT(flips[2], WithinRel(16.10, 1e-12));
    for (double f : flips) {
      CHECK(cavex::spectroscopy::drive_symmetry(geom, f - 0.05) !=
            cavex::spectroscopy::drive_symmetry(geom, f + 0.05));
    }
    // Each flip frequency falls strictly between neighboring harmonics.
    CHECK(flips[0] < 6.44);
    CHECK((flips[1] > 6.44 && flips[1] < 12.88));
    CHECK((flips[2] > 12.88 && flips[2] < 19.32));
  }
}

TEST_CASE("drive operator carries per-qubit weights with the symmetry sign") {
  const cavex::spectroscopy::DriveSpec drive{0.002, 5.0, +1};
  const Eigen::Matrix4d h =
      cavex::spectroscopy::drive_operator(drive, 0.12, 0.1, -1.2, -1.25);
  const double a1 = 0.002 * 0.12 / -1.2;
  const double a2 = 0.002 * 0.1 / -1.25;

  using namespace cavex::spectroscopy;
  CHECK(h(idx_e1, idx_gg) == a1);
  CHECK(h(idx_ee, idx_e2) == a1);
  CHECK(h(idx_e2, idx_gg) == a2);
  CHECK(h(idx_ee, idx_e1) == a2);
  CHECK(h == h.transpose().eval());
  CHECK(h.diagonal().isZero(0.0));
  CHECK(h(idx_gg, idx_ee) == 0.0);  // no direct two-photon element

  SECTION("negative symmetry flips only the qubit-2 weight") {
    const cavex::spectroscopy::DriveSpec anti{0.002, 5.0, -1};
    const Eigen::Matrix4d ha =
        cavex::spectroscopy::drive_operator(anti, 0.12, 0.1, -1.2, -1.25);
    CHECK(ha(idx_e1, idx_gg) == a1);
    CHECK(ha(idx_e2, idx_gg) == -a2);
  }

  SECTION("input validation") {
    CHECK_THROWS_AS(cavex::spectroscopy::drive_operator(drive, 0.1, 0.1, 0.0, -1.0),
                    cavex::ZeroDetuning);
    CHECK_THROWS_AS(cavex::spectroscopy::drive_operator({0.002, 5.0, 0}, 0.1, 0.1,
                                                        -1.0, -1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("equal-weight drives commute or anticommute with the qubit swap") {
  const Eigen::Matrix4d p = cavex::spectroscopy::qubit_swap_matrix();
  CHECK((p * p) == Eigen::Matrix4d::Identity());

  const Eigen::Matrix4d h_sym = cavex::spectroscopy::drive_operator(
      {0.001, 5.0, +1}, 0.1, 0.1, -1.0, -1.0);
  CHECK((h_sym * p - p * h_sym).isZero(0.0));

  const Eigen::Matrix4d h_anti = cavex::spectroscopy::drive_operator(
      {0.001, 5.0, -1}, 0.1, 0.1, -1.0, -1.0);
  CHECK((h_anti * p + p * h_anti).isZero(0.0));
}

TEST_CASE("dark branch selection covers all four sign regions") {
  using cavex::spectroscopy::Branch;
  using cavex::spectroscopy::dark_branch;
  // (coupling-product sign, detuning sign, drive symmetry) -> dark branch
  CHECK(dark_branch(+1, -1, +1) == Branch::psi_plus);
  CHECK(dark_branch(+1, +1, +1) == Branch::psi_minus);
  CHECK(dark_branch(-1, -1, -1) == Branch::psi_plus);
  CHECK(dark_branch(-1, +1, -1) == Branch::psi_minus);
  // Flipping the drive symmetry flips the dark branch.
  CHECK(dark_branch(+1, -1, -1) == Branch::psi_minus);
  CHECK(dark_branch(-1, -1, +1) == Branch::psi_minus);
  CHECK(dark_branch(+1, +1, -1) == Branch::psi_plus);
  CHECK(dark_branch(-1, +1, +1) == Branch::psi_plus);
  CHECK_THROWS_AS(dark_branch(0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(dark_branch(1, 2, 1), std::invalid_argument);
}

TEST_CASE("on-crossing spectrum extinguishes the branch the rule predicts") {
  const cavex::DeviceSpec dev = symmetric_instance();
  const double f = 9.0;  // both qubits, 1 GHz below the only mode
  const double j = cavex::dispersive::exchange_j(dev, f, f).j_total;
  REQUIRE(j > 0.0);  // opposite-end fundamental below resonance

  SECTION("antisymmetric drive darkens the symmetric upper branch") {
    const auto lines =
        cavex::spectroscopy::line_spectrum(dev, f, f, {0.001, f, -1});
    REQUIRE(lines.size() == 2);
    const auto& plus = find_line(lines, "psi_plus");
    const auto& minus = find_line(lines, "psi_minus");
    CHECK(plus.dark);
    CHECK_FALSE(minus.dark);
    CHECK(plus.intensity < 1e-25 * minus.intensity);
    CHECK_THAT(plus.f - minus.f, WithinRel(2.0 * j, 1e-12));
    CHECK(cavex::spectroscopy::dark_branch(-1, -1, -1) ==
          cavex::spectroscopy::Branch::psi_plus);
  }

  SECTION("symmetric drive darkens the antisymmetric lower branch") {
    const auto lines =
        cavex::spectroscopy::line_spectrum(dev, f, f, {0.001, f, +1});
    const auto& plus = find_line(lines, "psi_plus");
    const auto& minus = find_line(lines, "psi_minus");
    CHECK(minus.dark);
    CHECK_FALSE(plus.dark);
    CHECK(minus.intensity < 1e-25 * plus.intensity);
    CHECK(cavex::spectroscopy::dark_branch(-1, -1, +1) ==
          cavex::spectroscopy::Branch::psi_minus);
  }

  SECTION("bright-line intensity equals the coherent sum of both weights") {
    const auto lines =
        cavex::spectroscopy::line_spectrum(dev, f, f, {0.001, f, -1});
    const double g = cavex::transmon::coupling_strength(dev.qubit1, dev.resonator,
                                                        0, f);
    const double a = 0.001 * std::abs(g) / (f - 10.0);
    CHECK_THAT(find_line(lines, "psi_minus").intensity,
               WithinRel(2.0 * a * a, 1e-12));
  }
}

TEST_CASE("off-crossing both branches stay visible") {
  const cavex::DeviceSpec dev = symmetric_instance();
  const auto lines =
      cavex::spectroscopy::line_spectrum(dev, 9.05, 8.95, {0.001, 9.0, -1});
  CHECK_FALSE(lines[0].dark);
  CHECK_FALSE(lines[1].dark);
}

TEST_CASE("two-photon amplitude matches its closed form off and on resonance") {
  const double cases[][2] = {{0.008, 0.0}, {0.008, 0.03}, {-0.01, 0.02},
                             {0.005, -0.05}};
  for (const auto& c : cases) {
    const double j = c[0];
    const double dq = c[1];
    const double f1 = 5.2 + 0.5 * dq;
    const double f2 = 5.2 - 0.5 * dq;
    const Eigen::Matrix4d h_d = cavex::spectroscopy::drive_operator(
        {0.001, 5.2, +1}, 0.11, 0.12, -1.1, -1.2);
    const double a1 = h_d(cavex::spectroscopy::idx_e1, cavex::spectroscopy::idx_gg);
    const double a2 = h_d(cavex::spectroscopy::idx_e2, cavex::spectroscopy::idx_gg);
    const double r2 = 4.0 * j * j + dq * dq;
    const double expected = 4.0 * j * (a1 * a1 + a2 * a2) / r2;
    const double a =
        cavex::spectroscopy::two_photon_amplitude(j, f1, f2, h_d, 5.2);
    CHECK_THAT(a, WithinRel(expected, 1e-12));
  }
}

TEST_CASE("two-photon amplitude is drive-symmetry independent and quartic") {
  const Eigen::Matrix4d h_p = cavex::spectroscopy::drive_operator(
      {0.001, 5.2, +1}, 0.11, 0.12, -1.1, -1.2);
  const Eigen::Matrix4d h_m = cavex::spectroscopy::drive_operator(
      {0.001, 5.2, -1}, 0.11, 0.12, -1.1, -1.2);
  const double a_p =
      cavex::spectroscopy::two_photon_amplitude(0.008, 5.215, 5.185, h_p, 5.2);
  const double a_m =
      cavex::spectroscopy::two_photon_amplitude(0.008, 5.215, 5.185, h_m, 5.2);
  CHECK_THAT(a_m, WithinRel(a_p, 1e-12));

  const Eigen::Matrix4d h_2 = cavex::spectroscopy::drive_operator(
      {0.002, 5.2, +1}, 0.11, 0.12, -1.1, -1.2);
  const double a_2 =
      cavex::spectroscopy::two_photon_amplitude(0.008, 5.215, 5.185, h_2, 5.2);
  CHECK_THAT(a_2, WithinRel(4.0 * a_p, 1e-12));  // amplitude ~ eps^2
}

TEST_CASE("decoupled qubits give destructive path cancellation at the midpoint") {
  const Eigen::Matrix4d h_d = cavex::spectroscopy::drive_operator(
      {0.001, 5.2, +1}, 0.1, 0.1, -1.0, -1.0);
  const double a1 = h_d(cavex::spectroscopy::idx_e1, cavex::spectroscopy::idx_gg);
  const double a2 = h_d(cavex::spectroscopy::idx_e2, cavex::spectroscopy::idx_gg);
  const double dq = 0.1;
  const double path_scale = std::abs(a1 * a2) / (0.5 * dq);
  const double a = cavex::spectroscopy::two_photon_amplitude(
      0.0, 5.2 + 0.5 * dq, 5.2 - 0.5 * dq, h_d, 5.2);
  CHECK(std::abs(a) <= 1e-14 * path_scale);
}

TEST_CASE("driving onto an intermediate dressed state is rejected") {
  const Eigen::Matrix4d h_d = cavex::spectroscopy::drive_operator(
      {0.001, 5.2, +1}, 0.1, 0.1, -1.0, -1.0);
  const double j = 0.005;
  CHECK_THROWS_AS(cavex::spectroscopy::two_photon_amplitude(
                      j, 5.2, 5.2, h_d, 5.2 + j - 1e-9),
                  cavex::IntermediateStateResonance);
  CHECK_NOTHROW(cavex::spectroscopy::two_photon_amplitude(
      j, 5.2, 5.2, h_d, 5.2 + j - 1e-3));
}

TEST_CASE("device-level two-photon amplitude assembles its own ingredients") {
  const cavex::DeviceSpec dev = cavex::sample_a();
  const double f1 = 5.21, f2 = 5.21, fd = 5.0;
  const cavex::spectroscopy::DriveSpec drive{0.001, fd, -1};
  const double a =
      cavex::spectroscopy::two_photon_amplitude(dev, f1, f2, drive, fd);

  const double j = cavex::dispersive::exchange_j(dev, f1, f2).j_total;
  const double g1 =
      cavex::transmon::coupling_strength(dev.qubit1, dev.resonator, 0, f1);
  const double g2 =
      cavex::transmon::coupling_strength(dev.qubit2, dev.resonator, 0, f2);
  const Eigen::Matrix4d h_d = cavex::spectroscopy::drive_operator(
      drive, g1, g2, f1 - 6.44, f2 - 6.44);
  CHECK(a == cavex::spectroscopy::two_photon_amplitude(j, f1, f2, h_d, fd));
  CHECK(std::isfinite(a));
}

TEST_CASE("line spectrum synthesizes the two-photon line above threshold") {
  const cavex::DeviceSpec dev = symmetric_instance();
  const double f = 9.0;
  cavex::spectroscopy::LineSpectrumOptions opts;

  opts.two_photon = false;
  CHECK(cavex::spectroscopy::line_spectrum(dev, f, f, {0.001, f, -1}, opts).size() ==
        2);

  opts.two_photon = true;
  opts.two_photon_threshold = 0.01;  // amplitude below threshold: omitted
  CHECK(cavex::spectroscopy::line_spectrum(dev, f, f, {0.001, f, -1}, opts).size() ==
        2);

  opts.two_photon_threshold = 0.0;
  const auto lines =
      cavex::spectroscopy::line_spectrum(dev, f, f, {0.001, f, -1}, opts);
  REQUIRE(lines.size() == 3);
  const auto& tp = find_line(lines, "two_photon");
  CHECK(tp.f == f);  // midpoint of degenerate qubits
  const double j = cavex::dispersive::exchange_j(dev, f, f).j_total;
  const double g = cavex::transmon::coupling_strength(dev.qubit1, dev.resonator, 0, f);
  const double a = 0.001 * std::abs(g) / (f - 10.0);
  CHECK_THAT(tp.intensity, WithinRel(std::pow(2.0 * a * a / j, 2.0), 1e-10));
  CHECK_FALSE(tp.dark);
}

TEST_CASE("crossing map darkens one branch at the crossing and confines the "
          "two-photon feature") {
  const cavex::DeviceSpec dev = symmetric_instance();
  const double f1 = 9.0;
  cavex::FluxMap fmap;
  fmap.kind = cavex::FluxMap::Kind::linear;
  fmap.slope = 0.1;
  fmap.offset = 9.0;

  std::vector<double> flux;
  for (int i = -10; i <= 10; ++i) flux.push_back(0.1 * i);
  std::vector<double> f_drive;
  for (int k = 0; k <= 60; ++k) f_drive.push_back(8.97 + 0.001 * k);

  cavex::spectroscopy::CrossingMapOptions opts;
  opts.two_photon = true;
  const auto cm = cavex::spectroscopy::crossing_map(dev, flux, fmap, f1,
                                                    {0.001, f1, -1}, f_drive, opts);

  REQUIRE(cm.map.size() == 21);
  REQUIRE(cm.map[0].size() == 61);
  for (const auto& row : cm.map)
    for (double v : row) CHECK(v >= 0.0);

  SECTION("center row: upper branch dark, gap equals twice the exchange") {
    double f_plus = 0.0, f_minus = 0.0;
    bool dark_plus = false, dark_minus = true;
    for (const auto& l : cm.lines) {
      if (l.flux != 0.0) continue;
      if (l.label == "psi_plus") {
        f_plus = l.f;
        dark_plus = l.dark;
      } else if (l.label == "psi_minus") {
        f_minus = l.f;
        dark_minus = l.dark;
      }
    }
    CHECK(dark_plus);
    CHECK_FALSE(dark_minus);
    const double j = cavex::dispersive::exchange_j(dev, f1, f1).j_total;
    CHECK_THAT(f_plus - f_minus, WithinRel(2.0 * j, 1e-12));
  }

  SECTION("edge rows: both branches bright") {
    for (const auto& l : cm.lines)
      if (std::abs(l.flux) == 1.0 && l.label != "two_photon") CHECK_FALSE(l.dark);
  }

  SECTION("two-photon line list exists only near the crossing") {
    bool at_center = false;
    for (const auto& l : cm.lines)
      if (l.label == "two_photon") {
        CHECK(std::abs(l.flux) < 0.75);
        if (l.flux == 0.0) at_center = true;
      }
    CHECK(at_center);
  }
}
