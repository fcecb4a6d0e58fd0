#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "cavex/device.hpp"
#include "cavex/dispersive.hpp"
#include "cavex/errors.hpp"
#include "cavex/transmon.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinULP;

namespace {

cavex::DeviceSpec two_mode_toy() {
  cavex::DeviceSpec dev;
  dev.resonator = {5.0, 0.001, 2, "alternating"};
  dev.qubit1 = {0.25, 30.0, 0.1, cavex::End::left};
  dev.qubit2 = {0.25, 30.0, 0.1, cavex::End::right};
  dev.geometry = {1.2e8 / (2.0 * 5.0e9), 1.2e8};
  return dev;
}

}  // namespace

TEST_CASE("four-mode exchange at the working point matches the frozen value") {
  const cavex::DeviceSpec dev = cavex::sample_a();
  const cavex::dispersive::DispersiveResult res =
      cavex::dispersive::exchange_j(dev, 5.21, 5.21);

  CHECK_THAT(res.j_total, WithinRel(0.008221492523477746, 1e-14));
  REQUIRE(res.per_mode_terms.size() == 4);
  CHECK_THAT(res.per_mode_terms[0].value, WithinRel(0.011722039589961113, 1e-14));
  CHECK_THAT(res.per_mode_terms[1].value, WithinRel(-0.0037596111331557164, 1e-14));
  CHECK_THAT(res.per_mode_terms[2].value, WithinRel(0.0030655085816411426, 1e-14));
  CHECK_THAT(res.per_mode_terms[3].value, WithinRel(-0.002806444514968793, 1e-14));

  double sum = 0.0;
  for (const auto& t : res.per_mode_terms) sum += t.value;
  CHECK_THAT(res.j_total, WithinAbs(sum, 1e-12));
}

TEST_CASE("per-mode bookkeeping carries detunings, couplings and pulls") {
  const cavex::DeviceSpec dev = cavex::sample_a();
  const auto res = cavex::dispersive::exchange_j(dev, 5.21, 5.21);
  const auto& t0 = res.per_mode_terms[0];

  CHECK(t0.id.kind == cavex::dispersive::ModeId::Kind::harmonic);
  CHECK(t0.id.index == 0);
  CHECK(t0.delta1 == 5.21 - 6.44);
  CHECK(t0.delta2 == 5.21 - 6.44);
  CHECK_THAT(t0.delta1, WithinRel(-1.2300000000000004, 1e-15));
  CHECK_THAT(t0.g1, WithinRel(0.11962654751168411, 1e-14));
  CHECK_THAT(t0.g2, WithinRel(-0.12052599523733588, 1e-14));
  CHECK_THAT(t0.pull1, WithinRel(-0.011634561682573343, 1e-14));
  CHECK(t0.pull1 == cavex::dispersive::cavity_pull(t0.g1, t0.delta1));
  CHECK(t0.pull2 == cavex::dispersive::cavity_pull(t0.g2, t0.delta2));

  // Sign of each term alternates with the mode parity when both qubits sit
  // below the fundamental: the coupling product flips, the detunings do not.
  CHECK(res.per_mode_terms[0].value > 0.0);
  CHECK(res.per_mode_terms[1].value < 0.0);
  CHECK(res.per_mode_terms[2].value > 0.0);
  CHECK(res.per_mode_terms[3].value < 0.0);
}

TEST_CASE("mode selection telescopes one term at a time") {
  const cavex::DeviceSpec dev = cavex::sample_a();
  const auto full = cavex::dispersive::exchange_j(dev, 5.21, 5.21);
  double prev = 0.0;
  for (int m = 1; m <= 4; ++m) {
    const auto part = cavex::dispersive::exchange_j(
        dev, 5.21, 5.21, cavex::dispersive::ModeSelection::first_n(m));
    REQUIRE(part.per_mode_terms.size() == static_cast<std::size_t>(m));
    CHECK_THAT(part.j_total - prev,
               WithinRel(full.per_mode_terms[static_cast<std::size_t>(m - 1)].value,
                         1e-12));
    prev = part.j_total;
  }
  CHECK(prev == full.j_total);
}

TEST_CASE("single-mode exchange reduces to the textbook quotient") {
  cavex::DeviceSpec dev = two_mode_toy();
  dev.resonator.n_modes = 1;
  const double f = 4.4;
  const double fge = f;  // degenerate qubits
  const auto res = cavex::dispersive::exchange_j(dev, fge, fge);
  const double g1 = cavex::transmon::coupling_strength(dev.qubit1, dev.resonator, 0, f);
  const double g2 = cavex::transmon::coupling_strength(dev.qubit2, dev.resonator, 0, f);
  const double expected = g1 * g2 / (f - 5.0);
  CHECK_THAT(res.j_total, WithinRel(expected, 1e-15));
}

TEST_CASE("exchange is invariant under swapping which qubit sits at which end") {
  cavex::DeviceSpec dev = cavex::sample_a();
  const auto a = cavex::dispersive::exchange_j(dev, 5.21, 5.30);
  std::swap(dev.qubit1.end, dev.qubit2.end);
  const auto b = cavex::dispersive::exchange_j(dev, 5.21, 5.30);
  CHECK(a.j_total == b.j_total);  // bitwise: each product flips two signs
}

TEST_CASE("exchange is symmetric under exchanging the qubits themselves") {
  cavex::DeviceSpec dev = cavex::sample_a();
  const auto a = cavex::dispersive::exchange_j(dev, 5.21, 5.30);
  std::swap(dev.qubit1, dev.qubit2);
  const auto b = cavex::dispersive::exchange_j(dev, 5.30, 5.21);
  CHECK(a.j_total == b.j_total);
}

TEST_CASE("nondegenerate detuning uses the symmetrized inverse detunings") {
  const cavex::DeviceSpec dev = cavex::sample_a();
  const auto res = cavex::dispersive::exchange_j(dev, 5.21, 5.30);
  CHECK_THAT(res.j_total, WithinRel(0.008740077799810057, 1e-14));
}

TEST_CASE("spurious modes join the sum and can buck the harmonic part") {
  SECTION("full device with four spurious modes") {
    const cavex::DeviceSpec dev = cavex::sample_b();
    const double j = cavex::dispersive::exchange_j_total(dev, 5.0).j_total;
    CHECK_THAT(j, WithinRel(-0.02525487085413491, 1e-14));

    const auto harmonic_only = cavex::dispersive::exchange_j(
        dev, 5.0, 5.0, cavex::dispersive::ModeSelection::harmonic_only(dev));
    CHECK(harmonic_only.per_mode_terms.size() == 8);
    const auto all = cavex::dispersive::exchange_j(dev, 5.0, 5.0);
    CHECK(all.per_mode_terms.size() == 12);
    CHECK(all.per_mode_terms[8].id.kind ==
          cavex::dispersive::ModeId::Kind::spurious);
  }

  SECTION("an opposite-sign spurious mode shrinks the magnitude") {
    cavex::DeviceSpec dev = two_mode_toy();
    dev.spurious.push_back({7.5, 0.3, -1});
    const double f = 7.0;  // between the two harmonics, below the spurious mode
    const auto harmonic = cavex::dispersive::exchange_j(
        dev, f, f, cavex::dispersive::ModeSelection::harmonic_only(dev));
    const auto total = cavex::dispersive::exchange_j(dev, f, f);
    CHECK_THAT(harmonic.j_total, WithinRel(-0.016333333333333335, 1e-14));
    CHECK_THAT(total.j_total, WithinRel(-0.012553333333333335, 1e-14));
    CHECK(std::abs(total.j_total) < std::abs(harmonic.j_total));
    CHECK_THAT(total.j_total - harmonic.j_total, WithinRel(0.00378, 1e-12));
  }
}

TEST_CASE("partial sums split the ladder into even and odd prefixes") {
  const cavex::DeviceSpec dev = cavex::sample_a();

  SECTION("k = 0 is the fundamental alone vs the first pair") {
    const auto ps = cavex::dispersive::partial_sums(dev, 5.21, 0);
    const auto one = cavex::dispersive::exchange_j(
        dev, 5.21, 5.21, cavex::dispersive::ModeSelection::first_n(1));
    const auto two = cavex::dispersive::exchange_j(
        dev, 5.21, 5.21, cavex::dispersive::ModeSelection::first_n(2));
    CHECK(ps.even.j_total == one.j_total);
    CHECK(ps.odd.j_total == two.j_total);
    CHECK(ps.even.per_mode_terms.size() == 1);
    CHECK(ps.odd.per_mode_terms.size() == 2);
  }

  SECTION("k = 1 matches the frozen values and the convergence ratio") {
    const auto ps = cavex::dispersive::partial_sums(dev, 5.21, 1);
    CHECK_THAT(ps.even.j_total, WithinRel(0.01102793703844654, 1e-14));
    CHECK_THAT(ps.odd.j_total, WithinRel(0.008221492523477746, 1e-14));
    const double ratio =
        std::abs(ps.odd.j_total - ps.even.j_total) / std::abs(ps.even.j_total);
    CHECK_THAT(ratio, WithinRel(0.2544849961678894, 1e-12));
  }

  SECTION("k beyond the available ladder is rejected") {
    CHECK(cavex::dispersive::max_partial_k(dev) == 1);
    CHECK_THROWS_AS(cavex::dispersive::partial_sums(dev, 5.21, 2),
                    cavex::ModeIndexOutOfRange);
  }
}

TEST_CASE("resonant or near-resonant detunings trip the validity guard") {
  const cavex::DeviceSpec dev = cavex::sample_a();
  CHECK_THROWS_AS(cavex::dispersive::exchange_j(dev, 6.44, 6.44),
                  cavex::DispersiveBreakdown);
  // 240 MHz below the fundamental: inside 3g (~360 MHz), outside 1g.
  CHECK_THROWS_AS(cavex::dispersive::exchange_j(dev, 6.20, 6.20),
                  cavex::DispersiveBreakdown);
  CHECK_NOTHROW(cavex::dispersive::exchange_j(
      dev, 6.20, 6.20, cavex::dispersive::ModeSelection::all(dev), 1.0));
}

TEST_CASE("two-level eigenstates diagonalize the exchange block") {
  const double cases[][2] = {{0.01, 0.0},   {0.01, 0.05},  {-0.02, 0.03},
                             {0.008, -0.1}, {-0.015, 0.0}, {1e-4, 2.0}};
  for (const auto& c : cases) {
    const double j = c[0];
    const double dq = c[1];
    const auto st = cavex::dispersive::eigenstates(j, dq);
    Eigen::Matrix2d h;
    h << 0.5 * dq, j, j, -0.5 * dq;

    const Eigen::Vector2d rs = h * st.psi_s - st.e_s * st.psi_s;
    const Eigen::Vector2d ra = h * st.psi_a - st.e_a * st.psi_a;
    CHECK(rs.norm() < 1e-12);
    CHECK(ra.norm() < 1e-12);
    CHECK_THAT(st.psi_s.norm(), WithinAbs(1.0, 1e-14));
    CHECK_THAT(st.psi_a.norm(), WithinAbs(1.0, 1e-14));
    CHECK(std::abs(st.psi_s.dot(st.psi_a)) < 1e-14);
    CHECK(st.e_s >= st.e_a);
    CHECK_THAT(st.e_s - st.e_a, WithinRel(std::hypot(2.0 * j, dq), 1e-14));
  }
}

TEST_CASE("eigenstate limits: degenerate mixing and far-detuned pinning") {
  SECTION("degenerate qubits mix equally, branch order fixed by sign of J") {
    const auto plus = cavex::dispersive::eigenstates(0.01, 0.0);
    CHECK_THAT(plus.theta, WithinRel(std::numbers::pi / 4.0, 1e-14));
    CHECK_THAT(plus.psi_s[0], WithinRel(std::sqrt(0.5), 1e-14));
    CHECK_THAT(plus.psi_s[1], WithinRel(std::sqrt(0.5), 1e-14));

    const auto minus = cavex::dispersive::eigenstates(-0.01, 0.0);
    CHECK(minus.psi_s[0] * minus.psi_s[1] < 0.0);  // upper branch antisymmetric
    CHECK_THAT(std::abs(minus.psi_s[0]), WithinRel(std::sqrt(0.5), 1e-14));
  }

  SECTION("large positive detuning pins the upper branch on qubit 1") {
    const auto st = cavex::dispersive::eigenstates(0.001, 1.0);
    CHECK(std::abs(st.psi_s[0]) > 0.999);
    CHECK(std::abs(st.psi_s[1]) < 0.01);
    CHECK_THAT(st.e_s, WithinRel(0.5 * std::hypot(0.002, 1.0), 1e-14));
  }

  SECTION("both J and detuning zero has no preferred basis") {
    CHECK_THROWS_AS(cavex::dispersive::eigenstates(0.0, 0.0),
                    cavex::DegenerateUncoupled);
  }

  SECTION("mean frequency offsets both energies rigidly") {
    const auto st0 = cavex::dispersive::eigenstates(0.01, 0.02, 0.0);
    const auto st5 = cavex::dispersive::eigenstates(0.01, 0.02, 5.0);
    CHECK_THAT(st5.e_s - st0.e_s, WithinAbs(5.0, 1e-12));
    CHECK_THAT(st5.e_a - st0.e_a, WithinAbs(5.0, 1e-12));
    CHECK(st5.psi_s == st0.psi_s);
  }
}

TEST_CASE("branch frequencies preserve the trace and close the frozen gap") {
  SECTION("trace preservation is exact, not approximate") {
    const double probes[] = {5.0, 5.1999, 5.22, 5.3, 6.0};
    for (double fp : probes) {
      const auto br = cavex::dispersive::branch_frequencies(fp, 5.22, 0.01006);
      CHECK(br.first + br.second == fp + 5.22);
      CHECK(br.first >= br.second);
    }
  }

  SECTION("minimum gap at the crossing matches the frozen splitting") {
    const auto br = cavex::dispersive::branch_frequencies(5.2, 5.22, 0.01006);
    CHECK_THAT(br.first - br.second, WithinRel(0.02836925095944551, 1e-12));
  }

  SECTION("zero coupling degenerates to max/min of the bare lines") {
    // the half-sum/half-difference evaluation rounds twice, so only
    // near-ulp agreement is guaranteed
    const auto br = cavex::dispersive::branch_frequencies(5.1, 5.3, 0.0);
    CHECK_THAT(br.first, WithinULP(5.3, 4));
    CHECK_THAT(br.second, WithinULP(5.1, 4));
  }
}

TEST_CASE("cavity pull follows g^2 over delta") {
  CHECK_THAT(cavex::dispersive::cavity_pull(0.133, -1.23),
             WithinRel(-0.014381300813008133, 1e-15));
  CHECK(cavex::dispersive::cavity_pull(0.1, 0.5) > 0.0);
  CHECK_THROWS_AS(cavex::dispersive::cavity_pull(0.1, 0.0), cavex::ZeroDetuning);
}
