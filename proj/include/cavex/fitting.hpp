// fitting.hpp — Levenberg-Marquardt least squares, avoided-crossing parameter
// extraction, and spurious-mode extraction from exchange-vs-frequency data.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "device.hpp"
#include "dispersive.hpp"
#include "transmon.hpp"

namespace cavex::fitting {

// One spectroscopy peak: flux coordinate, measured line frequency, which
// avoided-crossing branch it belongs to, and its 1-sigma uncertainty.
enum class PeakBranch { upper, lower };

inline const char* to_string(PeakBranch b) {
  return b == PeakBranch::upper ? "upper" : "lower";
}

struct PeakRow {
  double x = 0.0;       // flux coordinate
  double f_peak = 0.0;  // measured peak frequency, GHz
  PeakBranch branch = PeakBranch::upper;
  double sigma = 0.0;   // measurement uncertainty, GHz
};

using PeakData = std::vector<PeakRow>;

// One exchange measurement: common qubit frequency, measured J, uncertainty.
struct JPoint {
  double f_ge = 0.0;  // GHz
  double j = 0.0;     // GHz
  double sigma = 0.0; // GHz
};

struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> sigmas;
  double residual_rms = 0.0;  // unweighted rms of (model - data), GHz
  int n_iter = 0;
  bool converged = false;
};

// ---- Levenberg-Marquardt core -------------------------------------------

struct LmOptions {
  int max_iter = 200;
  double xtol = 1e-9;   // relative step size below which the fit has converged
  double gtol = 1e-12;  // gradient infinity-norm below which it has converged
  double lambda0 = 1e-3;
};

struct LmOutcome {
  Eigen::VectorXd p;
  double chi2 = 0.0;
  int n_iter = 0;
  bool converged = false;
  Eigen::MatrixXd jtj;  // weighted information matrix at the final point
};

// Damped least squares with monotone acceptance: a trial step is taken only if
// it lowers chi^2, otherwise the damping grows and the step is retried.
template <class ResidFn, class JacFn>
LmOutcome lm_minimize(ResidFn&& residuals, JacFn&& jacobian,
                      const Eigen::VectorXd& p0, const LmOptions& opts = {}) {
  LmOutcome out;
  out.p = p0;
  Eigen::VectorXd r = residuals(out.p);
  out.chi2 = r.squaredNorm();
  if (!std::isfinite(out.chi2)) throw SingularFit("objective not finite at start");

  double lambda = opts.lambda0;
  Eigen::MatrixXd jac = jacobian(out.p);
  out.jtj = jac.transpose() * jac;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    out.n_iter = iter;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= opts.gtol) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd damped = out.jtj;
      for (int k = 0; k < damped.rows(); ++k)
        damped(k, k) += lambda * std::max(out.jtj(k, k), 1e-30);
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) throw SingularFit("normal equations singular");

      const Eigen::VectorXd p_try = out.p + step;
      const Eigen::VectorXd r_try = residuals(p_try);
      const double chi2_try = r_try.squaredNorm();
      if (std::isfinite(chi2_try) && chi2_try < out.chi2) {
        const double step_size = step.norm();
        out.p = p_try;
        r = r_try;
        out.chi2 = chi2_try;
        lambda = std::max(lambda / 3.0, 1e-14);
        jac = jacobian(out.p);
        out.jtj = jac.transpose() * jac;
        accepted = true;
        if (step_size <= opts.xtol * (out.p.norm() + opts.xtol)) {
          out.converged = true;
        }
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e14) break;
    }
    if (!accepted) {
      // Damping exhausted without an acceptable step: even an infinitesimal
      // damped-gradient move cannot lower chi^2, so the point is numerically
      // stationary.  Starting at (or reaching) the optimum lands here.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  return out;
}

// Central-difference Jacobian for models without analytic derivatives.
template <class ResidFn>
Eigen::MatrixXd fd_jacobian(ResidFn&& residuals, const Eigen::VectorXd& p) {
  const Eigen::VectorXd r0 = residuals(p);
  Eigen::MatrixXd jac(r0.size(), p.size());
  for (int k = 0; k < p.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
    Eigen::VectorXd pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    jac.col(k) = (residuals(pp) - residuals(pm)) / (2.0 * h);
  }
  return jac;
}

// One-sigma parameter uncertainties from the weighted information matrix:
// covariance = inverse(jtj) * chi2 / dof.  Throws SingularInformation when the
// information matrix is rank deficient (some parameter combination is
// unconstrained by the data).
inline Eigen::VectorXd uncertainty(const Eigen::MatrixXd& jtj, double chi2, int dof) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jtj);
  if (es.info() != Eigen::Success)
    throw SingularInformation("eigendecomposition of information matrix failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double lmax = ev[ev.size() - 1];
  if (!(lmax > 0.0) || ev[0] <= 1e-12 * lmax)
    throw SingularInformation("information matrix is rank deficient (eigenvalues " +
                              std::to_string(ev[0]) + " .. " + std::to_string(lmax) +
                              ")");
  const double s2 = chi2 / double(std::max(dof, 1));
  Eigen::MatrixXd cov = es.eigenvectors() *
                        ev.cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose() * s2;
  return cov.diagonal().cwiseSqrt();
}

// ---- avoided-crossing fit -------------------------------------------------

namespace detail {

struct CrossingModel {
  // parameter order: (f_ge1, j, slope, offset)
  static double probe(const Eigen::VectorXd& p, double x) {
    return p[2] * x + p[3];
  }
  static double eval(const Eigen::VectorXd& p, double x, PeakBranch branch) {
    const double w = probe(p, x);
    const double s = std::max(std::hypot(p[0] - w, 2.0 * p[1]), 1e-18);
    return branch == PeakBranch::upper ? 0.5 * (w + p[0] + s) : 0.5 * (w + p[0] - s);
  }
  static Eigen::Vector4d grad(const Eigen::VectorXd& p, double x, PeakBranch branch) {
    const double w = probe(p, x);
    const double s = std::max(std::hypot(p[0] - w, 2.0 * p[1]), 1e-18);
    const double sgn = branch == PeakBranch::upper ? +1.0 : -1.0;
    const double df = 0.5 * (1.0 + sgn * (p[0] - w) / s);
    const double dj = sgn * 2.0 * p[1] / s;
    const double dw = 0.5 * (1.0 - sgn * (p[0] - w) / s);
    return {df, dj, dw * x, dw};
  }
};

// Data-driven starting point: the crossing center from the innermost branch
// frequencies, and the probe line from the branch-sum trace where both
// branches were measured at the same flux.
inline Eigen::Vector4d crossing_start(const PeakData& data) {
  double min_upper = std::numeric_limits<double>::infinity();
  double max_lower = -std::numeric_limits<double>::infinity();
  for (const PeakRow& row : data) {
    if (row.branch == PeakBranch::upper) min_upper = std::min(min_upper, row.f_peak);
    if (row.branch == PeakBranch::lower) max_lower = std::max(max_lower, row.f_peak);
  }
  const double f0 = 0.5 * (min_upper + max_lower);
  const double j0 = std::max(0.5 * (min_upper - max_lower), 1e-4);

  // Pair rows sharing a flux coordinate; their sum minus f0 tracks the probe.
  std::map<double, std::pair<double, int>> by_x;
  for (const PeakRow& row : data) {
    auto& [sum, count] = by_x[row.x];
    sum += row.f_peak;
    ++count;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [x, sc] : by_x) {
    if (sc.second != 2) continue;
    const double y = sc.first - f0;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  double slope = 0.0, offset = f0;
  const double det = n * sxx - sx * sx;
  if (n >= 2 && std::abs(det) > 1e-300) {
    slope = (n * sxy - sx * sy) / det;
    offset = (sy - slope * sx) / n;
  } else {
    // No paired fluxes: regress the rows far from the center, where each
    // branch follows the probe line directly.
    sx = sy = sxx = sxy = 0;
    n = 0;
    for (const PeakRow& row : data) {
      if (std::abs(row.f_peak - f0) < j0) continue;
      sx += row.x;
      sy += row.f_peak;
      sxx += row.x * row.x;
      sxy += row.x * row.f_peak;
      ++n;
    }
    const double det2 = n * sxx - sx * sx;
    if (n >= 2 && std::abs(det2) > 1e-300) {
      slope = (n * sxy - sx * sy) / det2;
      offset = (sy - slope * sx) / n;
    }
  }
  return {f0, j0, slope, offset};
}

}  // namespace detail

// Fit the avoided-crossing branch model to peak data: a fixed line at f_ge1
// crosses a probe line slope * x + offset with exchange j.  The flux map
// provides the starting probe-line coefficients; a data-driven start is also
// tried and the better optimum kept.  Reported params: f_ge1, j (magnitude),
// slope, offset.
inline FitResult fit_crossing(const PeakData& data, const FluxMap& flux_map) {
  if (flux_map.kind != FluxMap::Kind::linear)
    throw std::invalid_argument("crossing fit requires a linear flux map");

  int n_upper = 0, n_lower = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i].sigma > 0.0))
      throw std::invalid_argument("sigma must be > 0 (row " + std::to_string(i) + ")");
    (data[i].branch == PeakBranch::upper ? n_upper : n_lower) += 1;
  }
  if (n_upper == 0 || n_lower == 0)
    throw NotBracketed("data covers only the " +
                       std::string(n_upper == 0 ? "lower" : "upper") + " branch");
  if (n_upper < 3 || n_lower < 3)
    throw NotBracketed("need at least 3 points per branch, got " +
                       std::to_string(n_upper) + " upper / " +
                       std::to_string(n_lower) + " lower");

  auto residuals = [&data](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(long(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
      r[long(i)] =
          (detail::CrossingModel::eval(p, data[i].x, data[i].branch) - data[i].f_peak) /
          data[i].sigma;
    return r;
  };
  auto jacobian = [&data](const Eigen::VectorXd& p) {
    Eigen::MatrixXd jac(long(data.size()), 4);
    for (std::size_t i = 0; i < data.size(); ++i)
      jac.row(long(i)) =
          detail::CrossingModel::grad(p, data[i].x, data[i].branch).transpose() /
          data[i].sigma;
    return jac;
  };

  const Eigen::Vector4d start = detail::crossing_start(data);
  Eigen::Vector4d start_map = start;
  start_map[2] = flux_map.slope;
  start_map[3] = flux_map.offset;

  LmOutcome best = lm_minimize(residuals, jacobian, start);
  const LmOutcome alt = lm_minimize(residuals, jacobian, start_map);
  if (alt.chi2 < best.chi2) best = alt;

  // The fitted crossing must lie inside the measured flux window.
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  for (const PeakRow& row : data) {
    x_min = std::min(x_min, row.x);
    x_max = std::max(x_max, row.x);
  }
  if (std::abs(best.p[2]) < 1e-300)
    throw NotBracketed("probe line is flat; crossing position undetermined");
  const double x_cross = (best.p[0] - best.p[3]) / best.p[2];
  if (!(x_cross >= x_min && x_cross <= x_max))
    throw NotBracketed("fitted crossing at x = " + std::to_string(x_cross) +
                       " outside measured range [" + std::to_string(x_min) + ", " +
                       std::to_string(x_max) + "]");

  FitResult fit;
  fit.params["f_ge1"] = best.p[0];
  fit.params["j"] = std::abs(best.p[1]);
  fit.params["slope"] = best.p[2];
  fit.params["offset"] = best.p[3];
  fit.n_iter = best.n_iter;
  fit.converged = best.converged;

  double ss = 0.0;
  for (const PeakRow& row : data) {
    const double d = detail::CrossingModel::eval(best.p, row.x, row.branch) - row.f_peak;
    ss += d * d;
  }
  fit.residual_rms = std::sqrt(ss / double(data.size()));

  try {
    const Eigen::VectorXd sig =
        uncertainty(best.jtj, best.chi2, int(data.size()) - 4);
    fit.sigmas["f_ge1"] = sig[0];
    fit.sigmas["j"] = sig[1];
    fit.sigmas["slope"] = sig[2];
    fit.sigmas["offset"] = sig[3];
  } catch (const SingularInformation&) {
    const double inf = std::numeric_limits<double>::infinity();
    fit.sigmas = {{"f_ge1", inf}, {"j", inf}, {"slope", inf}, {"offset", inf}};
  }
  return fit;
}

// ---- spurious-mode fit ------------------------------------------------------

namespace detail {

// Exchange contribution of spurious mode l (0-based) at common qubit frequency
// f: sign * u^2 * (f / f0) / (f - w), where u^2 is the coupling product at the
// fundamental-frequency reference and the sign alternates with l.  The sign
// alternation is built into the parameterization, so it holds exactly for any
// parameter values the optimizer visits.
inline double spurious_sign(int l) { return l % 2 == 0 ? +1.0 : -1.0; }

inline double spurious_term(double f, double f0, double w, double u, int l) {
  double d = f - w;
  if (std::abs(d) < 1e-9) d = (d < 0.0 ? -1e-9 : 1e-9);
  return spurious_sign(l) * u * u * (f / f0) / d;
}

}  // namespace detail

// Fit n_spurious extra resonances to measured exchange-vs-frequency data on top
// of the device's harmonic mode sum.  Parameters per resonance l (1-based in
// the report): freq_l (GHz) and product_l, the signed coupling product
// g^(1) g^(2) referenced to the fundamental frequency (GHz^2).  Starting
// points are taken from every combination of inter-mode gaps overlapping the
// data; the best optimum wins.
inline FitResult fit_spurious(const std::vector<JPoint>& data, const DeviceSpec& dev,
                              int n_spurious,
                              double guard = dispersive::default_guard) {
  if (n_spurious < 0) throw std::invalid_argument("n_spurious must be >= 0");
  if (int(data.size()) < 2 * n_spurious + 1)
    throw InsufficientData("need more than " + std::to_string(2 * n_spurious) +
                           " points to fit " + std::to_string(n_spurious) +
                           " resonances, got " + std::to_string(data.size()));

  const double f0 = dev.resonator.f0;
  const dispersive::ModeSelection harmonic =
      dispersive::ModeSelection::harmonic_only(dev);

  // The harmonic part is fixed; guard-check it and precompute it per point.
  std::vector<double> j_harm(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i].sigma > 0.0))
      throw std::invalid_argument("sigma must be > 0 (row " + std::to_string(i) + ")");
    try {
      j_harm[i] = dispersive::exchange_j(dev, data[i].f_ge, data[i].f_ge, harmonic,
                                         guard)
                      .j_total;
    } catch (const DispersiveBreakdown& e) {
      throw GuardViolation("data point " + std::to_string(i) + " (f_ge = " +
                           std::to_string(data[i].f_ge) + " GHz): " + e.what());
    }
  }

  if (n_spurious == 0) {
    FitResult fit;
    double ss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double d = j_harm[i] - data[i].j;
      ss += d * d;
    }
    fit.residual_rms = std::sqrt(ss / double(data.size()));
    fit.converged = true;
    return fit;
  }

  // parameter layout: (w_1..w_n, u_1..u_n)
  auto residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(long(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      double model = j_harm[i];
      for (int l = 0; l < n_spurious; ++l)
        model += detail::spurious_term(data[i].f_ge, f0, p[l], p[n_spurious + l], l);
      r[long(i)] = (model - data[i].j) / data[i].sigma;
    }
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& p) { return fd_jacobian(residuals, p); };

  // Candidate starting points: one per inter-mode gap overlapping the data.
  // A resonance inside a gap leaves a pole in the residual, visible as a large
  // sign flip between adjacent data points; the flip midpoint and the coupling
  // scale implied by inverting the pole law at the flanking points make a far
  // better start than the bare gap midpoint, which stays as the fallback.
  struct StartCandidate {
    double w = 0.0;
    double u = 0.0;
  };
  double f_min = std::numeric_limits<double>::infinity(), f_max = -f_min;
  for (const JPoint& pt : data) {
    f_min = std::min(f_min, pt.f_ge);
    f_max = std::max(f_max, pt.f_ge);
  }
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data[a].f_ge < data[b].f_ge;
  });
  const auto law_u = [&](double w) {
    return std::sqrt(dev.qubit1.g0 * dev.qubit2.g0 * (w / f0));
  };
  std::vector<StartCandidate> candidates;
  for (int j = 0; j + 1 < dev.resonator.n_modes; ++j) {
    const double lo = dev.resonator.mode_freq(j);
    const double hi = dev.resonator.mode_freq(j + 1);
    if (hi < f_min || lo > f_max) continue;
    const double glo = std::max(lo, f_min);
    const double ghi = std::min(hi, f_max);
    StartCandidate cand{0.5 * (glo + ghi), 0.0};
    double best_flip = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const JPoint& a = data[order[k]];
      const JPoint& b = data[order[k + 1]];
      if (a.f_ge < glo || b.f_ge > ghi) continue;
      const double ra = a.j - j_harm[order[k]];
      const double rb = b.j - j_harm[order[k + 1]];
      if (!(ra * rb < 0.0)) continue;
      const double flip = std::abs(ra - rb);
      if (flip <= best_flip) continue;
      best_flip = flip;
      cand.w = 0.5 * (a.f_ge + b.f_ge);
      // residual ~ +-u^2 (f/f0) / (f - w), inverted at the flanking points
      const double est_a = std::abs(ra) * std::abs(a.f_ge - cand.w) * f0 / a.f_ge;
      const double est_b = std::abs(rb) * std::abs(b.f_ge - cand.w) * f0 / b.f_ge;
      cand.u = std::sqrt(std::max(est_a, est_b));
    }
    if (cand.u == 0.0) cand.u = law_u(cand.w);
    candidates.push_back(cand);
  }
  // Data that stops short of a gap leaves any resonance beyond it invisible to
  // the overlap rule, so the nearest gaps entirely below and above the data
  // join as unclipped candidates: a pole outside the measured band fits the
  // smooth tail, and its covariance then reports how weakly it is pinned.
  const auto add_gap_mid = [&](int j) {
    const double w =
        0.5 * (dev.resonator.mode_freq(j) + dev.resonator.mode_freq(j + 1));
    candidates.push_back({w, law_u(w)});
  };
  for (int j = dev.resonator.n_modes - 2; j >= 0; --j)
    if (dev.resonator.mode_freq(j + 1) < f_min) {
      add_gap_mid(j);
      break;
    }
  for (int j = 0; j + 1 < dev.resonator.n_modes; ++j)
    if (dev.resonator.mode_freq(j) > f_max) {
      add_gap_mid(j);
      break;
    }
  if (candidates.empty())
    candidates.push_back({0.5 * (f_min + f_max), law_u(0.5 * (f_min + f_max))});

  // All non-decreasing assignments of candidates to the n_spurious slots.
  std::vector<std::vector<int>> assignments;
  std::vector<int> cur(n_spurious, 0);
  std::function<void(int, int)> enumerate = [&](int slot, int first) {
    if (int(assignments.size()) >= 256) return;
    if (slot == n_spurious) {
      assignments.push_back(cur);
      return;
    }
    for (int c = first; c < int(candidates.size()); ++c) {
      cur[slot] = c;
      enumerate(slot + 1, c);
    }
  };
  enumerate(0, 0);

  std::optional<LmOutcome> best;
  LmOptions opts;
  for (const std::vector<int>& asg : assignments) {
    Eigen::VectorXd p0(2 * n_spurious);
    for (int l = 0; l < n_spurious; ++l) {
      p0[l] = candidates[asg[l]].w;
      p0[n_spurious + l] = candidates[asg[l]].u;
    }
    try {
      const LmOutcome run = lm_minimize(residuals, jacobian, p0, opts);
      if (!best || run.chi2 < best->chi2) best = run;
    } catch (const SingularFit&) {
      // A start collapsing onto a data point can blow up; other starts decide.
    }
  }
  if (!best) throw SingularFit("every starting point failed");

  FitResult fit;
  for (int l = 0; l < n_spurious; ++l) {
    const std::string tag = std::to_string(l + 1);
    fit.params["freq_" + tag] = best->p[l];
    fit.params["product_" + tag] =
        detail::spurious_sign(l) * best->p[n_spurious + l] * best->p[n_spurious + l];
  }
  fit.n_iter = best->n_iter;
  fit.converged = best->converged;

  double ss = 0.0;
  {
    const Eigen::VectorXd r = residuals(best->p);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double d = r[long(i)] * data[i].sigma;
      ss += d * d;
    }
  }
  fit.residual_rms = std::sqrt(ss / double(data.size()));

  try {
    const Eigen::VectorXd sig =
        uncertainty(best->jtj, best->chi2, int(data.size()) - 2 * n_spurious);
    for (int l = 0; l < n_spurious; ++l) {
      const std::string tag = std::to_string(l + 1);
      fit.sigmas["freq_" + tag] = sig[l];
      // product = +-u^2, so sigma(product) = 2 |u| sigma(u).
      fit.sigmas["product_" + tag] =
          2.0 * std::abs(best->p[n_spurious + l]) * sig[n_spurious + l];
    }
  } catch (const SingularInformation&) {
    const double inf = std::numeric_limits<double>::infinity();
    for (int l = 0; l < n_spurious; ++l) {
      const std::string tag = std::to_string(l + 1);
      fit.sigmas["freq_" + tag] = inf;
      fit.sigmas["product_" + tag] = inf;
    }
  }
  return fit;
}

}  // namespace cavex::fitting
