// cavex command-line front end: device validation with exact-model spot
// checks, exchange sweeps, spectroscopy-map synthesis, and parameter fits.
// Outputs are deterministic and stamped with tool version, config hash, seed.
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cavex/cavex.hpp"
#include "cavex/device_json.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  long seed = 0;
  int threads = 0;  // 0: use CAVEX_THREADS if set, else 1
  bool exact = false;
};

int effective_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("CAVEX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// Run fn(0..n-1) on a small worker pool.  Workers pull indices from a shared
// counter; results must be written to preallocated slots so output order never
// depends on scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) break;
          fn(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cavex::ConfigError("cannot open config file \"" + path + "\"");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw cavex::ConfigError("config \"" + path + "\" is not valid JSON: " + e.what());
  }
}

cavex::DeviceSpec resolve_device(const json& cfg,
                                 const std::filesystem::path& config_dir) {
  if (!cfg.contains("device"))
    throw cavex::ConfigError("config is missing the \"device\" entry");
  const json& d = cfg.at("device");
  if (d.is_object()) return d.get<cavex::DeviceSpec>();
  if (!d.is_string())
    throw cavex::ConfigError("\"device\" must be a preset name, a file path, "
                             "or an inline object");
  const std::string name = d.get<std::string>();
  if (name == "sample_a") return cavex::sample_a();
  if (name == "sample_b") return cavex::sample_b();
  std::filesystem::path p = name;
  if (p.is_relative()) p = config_dir / p;
  std::ifstream in(p);
  if (!in)
    throw cavex::ConfigError("cannot open device file \"" + p.string() +
                             "\" (not a preset name)");
  try {
    return json::parse(in).get<cavex::DeviceSpec>();
  } catch (const json::parse_error& e) {
    throw cavex::ConfigError("device file \"" + p.string() + "\": " + e.what());
  }
}

std::filesystem::path resolve_input(const std::string& name,
                                    const std::filesystem::path& config_dir) {
  std::filesystem::path p = name;
  if (p.is_relative()) p = config_dir / p;
  return p;
}

// Metadata stamped into every output file.
struct Meta {
  std::string config_hash;
  long seed = 0;
};

Meta make_meta(const json& cfg, long seed) {
  return {cavex::io::hex64(cavex::io::fnv1a64(cfg.dump())), seed};
}

void csv_meta(std::ostream& os, const Meta& m) {
  os << "# cavex " << cavex::version << "\n";
  os << "# config_hash=" << m.config_hash << "\n";
  os << "# seed=" << m.seed << "\n";
}

json json_meta(const Meta& m) {
  return {{"tool", "cavex"},
          {"version", cavex::version},
          {"config_hash", m.config_hash},
          {"seed", m.seed}};
}

std::ofstream open_output(const std::filesystem::path& dir,
                          const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw cavex::ConfigError("cannot write output file \"" + p.string() + "\"");
  return out;
}

std::string fmt(double v) { return cavex::io::format_double(v, 12); }

// Required-key lookup that names the offending key instead of leaking a bare
// JSON-library exception.
const json& require_key(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw cavex::ConfigError(where + " is missing \"" + key + "\"");
  return obj.at(key);
}

// A grid is either an explicit array or {"start", "stop", "n"}.
std::vector<double> parse_grid(const json& g, const std::string& what) {
  std::vector<double> out;
  if (g.is_array()) {
    out = g.get<std::vector<double>>();
  } else if (g.is_object()) {
    const double start = require_key(g, "start", what).get<double>();
    const double stop = require_key(g, "stop", what).get<double>();
    const long n = require_key(g, "n", what).get<long>();
    if (n < 0) throw cavex::ConfigError(what + ": n must be >= 0");
    if (n > 1000000) throw cavex::ConfigError(what + ": n is implausibly large");
    if (n >= 2 && !(stop >= start))
      throw cavex::ConfigError(what + ": stop must be >= start");
    for (long i = 0; i < n; ++i)
      out.push_back(n == 1 ? start
                           : start + (stop - start) * double(i) / double(n - 1));
  } else {
    throw cavex::ConfigError(what + " must be an array or {start, stop, n}");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i]))
      throw cavex::ConfigError(what + ": grid values must be finite");
    if (i > 0 && out[i] < out[i - 1])
      throw cavex::ConfigError(what + ": grid must be monotone nondecreasing");
  }
  return out;
}

// Largest mode count whose truncated basis stays under the dimension cap.
int exact_mode_capacity(const cavex::DeviceSpec& dev, int n_max) {
  int m = 0;
  double dim = 4.0;
  while (m < dev.resonator.n_modes) {
    dim *= double(n_max + 1);
    if (dim > double(cavex::exact::default_dim_cap)) break;
    ++m;
  }
  return m;
}

// ---- validate ---------------------------------------------------------------

int cmd_validate(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const auto config_dir = std::filesystem::path(args.config_path).parent_path();
  const cavex::DeviceSpec dev = resolve_device(cfg, config_dir);
  const Meta meta = make_meta(cfg, args.seed);
  const json block = cfg.value("validate", json::object());
  const int n_max = block.value("n_max", 1);
  const double guard = block.value("guard", cavex::dispersive::default_guard);
  const double threshold = block.value("oracle_threshold", 0.10);

  const std::vector<cavex::Violation> violations = cavex::validate_device(dev);
  int hard = 0;
  json vio_json = json::array();
  for (const auto& v : violations) {
    vio_json.push_back({{"field", v.field}, {"rule", v.rule}, {"warning", v.warning}});
    if (!v.warning) ++hard;
    std::cout << (v.warning ? "warning: " : "violation: ") << v.field << ": "
              << v.rule << "\n";
  }

  // Cross-check the perturbative exchange against the exact gap at a few
  // points well below the fundamental.  A structurally broken device cannot
  // be cross-checked, so hard violations short-circuit the oracle phase.
  std::vector<double> grid;
  if (hard == 0) {
    if (block.contains("grid")) {
      grid = parse_grid(block.at("grid"), "validate.grid");
    } else {
      for (double r : {0.72, 0.78, 0.84}) grid.push_back(r * dev.resonator.f0);
    }
  }
  const int m = std::min(exact_mode_capacity(dev, n_max), dev.resonator.n_modes);
  if (hard == 0 && m < 1)
    throw cavex::ConfigError("n_max too large for even one exact mode");

  bool oracle_ok = true;
  json oracle = json::array();
  std::vector<json> rows(grid.size());
  parallel_for(grid.size(), effective_threads(args.threads), [&](std::size_t i) {
    const double f = grid[i];
    json row = {{"f_ge_GHz", f}};
    try {
      const double j = cavex::dispersive::exchange_j(
                           dev, f, f, cavex::dispersive::ModeSelection::first_n(m),
                           guard)
                           .j_total;
      const double half =
          0.5 * cavex::exact::effective_splitting(dev, f, n_max, m, guard);
      const double rel = std::abs(half - std::abs(j)) / std::abs(j);
      row["j_disp_GHz"] = j;
      row["half_gap_GHz"] = half;
      row["rel_dev"] = rel;
      row["pass"] = rel <= threshold;
    } catch (const cavex::Error& e) {
      row["error"] = e.what();
      row["pass"] = false;
    }
    rows[i] = std::move(row);
  });
  for (json& row : rows) {
    if (!row.value("pass", false)) oracle_ok = false;
    if (row.contains("error")) {
      std::cout << "oracle check at f_ge = " << fmt(row["f_ge_GHz"].get<double>())
                << " GHz: " << row["error"].get<std::string>() << " -> fail\n";
    } else {
      std::cout << "oracle check at f_ge = " << fmt(row["f_ge_GHz"].get<double>())
                << " GHz: |J| = " << fmt(std::abs(row["j_disp_GHz"].get<double>()))
                << " GHz, exact half gap = " << fmt(row["half_gap_GHz"].get<double>())
                << " GHz, rel dev = " << fmt(row["rel_dev"].get<double>()) << " -> "
                << (row["pass"].get<bool>() ? "pass" : "fail") << "\n";
    }
    oracle.push_back(std::move(row));
  }

  const bool pass = hard == 0 && oracle_ok;
  json report = {{"meta", json_meta(meta)},
                 {"violations", vio_json},
                 {"oracle", oracle},
                 {"pass", pass}};
  auto out = open_output(args.out_dir, "validate.json");
  out << report.dump(2) << "\n";
  std::cout << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

// ---- j-sweep ----------------------------------------------------------------

int cmd_j_sweep(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const auto config_dir = std::filesystem::path(args.config_path).parent_path();
  const cavex::DeviceSpec dev = resolve_device(cfg, config_dir);
  const Meta meta = make_meta(cfg, args.seed);
  if (!cfg.contains("j_sweep"))
    throw cavex::ConfigError("config is missing the \"j_sweep\" block");
  const json& block = cfg.at("j_sweep");
  const std::vector<double> grid =
      parse_grid(require_key(block, "grid", "j_sweep"), "j_sweep.grid");
  const double guard = block.value("guard", cavex::dispersive::default_guard);
  const int n_max = block.value("n_max", 1);
  int exact_modes = block.value("exact_n_modes", 0);
  if (args.exact && exact_modes <= 0)
    exact_modes = std::min(exact_mode_capacity(dev, n_max), dev.resonator.n_modes);
  if (args.exact && exact_modes < 1)
    throw cavex::ConfigError("n_max too large for even one exact mode");

  const int k_max = cavex::dispersive::max_partial_k(dev);

  struct Row {
    std::optional<double> j_disp, j_even, j_odd, j_tot, j_exact_half;
    std::string flag;
  };
  std::vector<Row> rows(grid.size());

  parallel_for(grid.size(), effective_threads(args.threads), [&](std::size_t i) {
    const double f = grid[i];
    Row& row = rows[i];
    try {
      row.j_disp = cavex::dispersive::exchange_j(
                       dev, f, f, cavex::dispersive::ModeSelection::harmonic_only(dev),
                       guard)
                       .j_total;
      if (k_max >= 0) {
        const auto ps = cavex::dispersive::partial_sums(dev, f, k_max, guard);
        row.j_even = ps.even.j_total;
        row.j_odd = ps.odd.j_total;
      }
      row.j_tot = cavex::dispersive::exchange_j(
                      dev, f, f, cavex::dispersive::ModeSelection::all(dev), guard)
                      .j_total;
      if (args.exact)
        row.j_exact_half = 0.5 * cavex::exact::effective_splitting(
                                     dev, f, n_max, exact_modes, guard);
    } catch (const cavex::DispersiveBreakdown&) {
      row = Row{};
      row.flag = "guard";
    } catch (const cavex::StateIdentificationAmbiguous&) {
      row = Row{};
      row.flag = "ambiguous";
    }
  });

  auto out = open_output(args.out_dir, "j_sweep.csv");
  csv_meta(out, meta);
  out << "f_ge_GHz,J_disp_GHz,J_even_GHz,J_odd_GHz,J_tot_GHz";
  if (args.exact) out << ",J_exact_half_gap_GHz";
  out << ",flag\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Row& r = rows[i];
    out << fmt(grid[i]) << ',' << cell(r.j_disp) << ',' << cell(r.j_even) << ','
        << cell(r.j_odd) << ',' << cell(r.j_tot);
    if (args.exact) out << ',' << cell(r.j_exact_half);
    out << ',' << r.flag << "\n";
  }
  std::cout << "wrote " << (std::filesystem::path(args.out_dir) / "j_sweep.csv").string()
            << " (" << grid.size() << " rows)\n";
  return 0;
}

// ---- fit output helpers -----------------------------------------------------

void write_fit_json(const std::filesystem::path& dir, const std::string& name,
                    const Meta& meta, const cavex::fitting::FitResult& fit) {
  json params(fit.params), sigmas(fit.sigmas);
  // JSON has no infinity; report unconstrained sigmas as null.
  for (auto& [k, v] : sigmas.items())
    if (!std::isfinite(v.get<double>())) v = nullptr;
  json doc = {{"meta", json_meta(meta)},
              {"params", params},
              {"sigmas", sigmas},
              {"residual_rms_GHz", fit.residual_rms},
              {"n_iter", fit.n_iter},
              {"converged", fit.converged}};
  auto out = open_output(dir, name);
  out << doc.dump(2) << "\n";
}

// ---- fit-crossing -----------------------------------------------------------

int cmd_fit_crossing(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const auto config_dir = std::filesystem::path(args.config_path).parent_path();
  const Meta meta = make_meta(cfg, args.seed);
  if (!cfg.contains("fit_crossing"))
    throw cavex::ConfigError("config is missing the \"fit_crossing\" block");
  const json& block = cfg.at("fit_crossing");
  const auto data_path = resolve_input(
      require_key(block, "data", "fit_crossing").get<std::string>(), config_dir);
  const cavex::FluxMap fmap =
      require_key(block, "flux_map", "fit_crossing").get<cavex::FluxMap>();

  std::ifstream in(data_path);
  if (!in)
    throw cavex::ConfigError("cannot open data file \"" + data_path.string() + "\"");
  const cavex::fitting::PeakData data =
      cavex::io::read_peak_csv(in, data_path.filename().string());

  const cavex::fitting::FitResult fit = cavex::fitting::fit_crossing(data, fmap);
  write_fit_json(args.out_dir, "fit_crossing.json", meta, fit);

  Eigen::Vector4d p(fit.params.at("f_ge1"), fit.params.at("j"),
                    fit.params.at("slope"), fit.params.at("offset"));
  auto out = open_output(args.out_dir, "fit_crossing_residuals.csv");
  csv_meta(out, meta);
  out << "x,f_peak_GHz,branch,sigma_GHz,model_GHz,residual_GHz\n";
  for (const auto& row : data) {
    const double model = cavex::fitting::detail::CrossingModel::eval(p, row.x, row.branch);
    out << fmt(row.x) << ',' << fmt(row.f_peak) << ','
        << cavex::fitting::to_string(row.branch) << ',' << fmt(row.sigma) << ','
        << fmt(model) << ',' << fmt(model - row.f_peak) << "\n";
  }

  std::cout << "f_ge1 = " << fmt(fit.params.at("f_ge1")) << " GHz, J = "
            << fmt(fit.params.at("j")) << " GHz, residual rms = "
            << fmt(fit.residual_rms) << " GHz, "
            << (fit.converged ? "converged" : "NOT converged") << "\n";
  return fit.converged ? 0 : 1;
}

// ---- fit-spurious -----------------------------------------------------------

int cmd_fit_spurious(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const auto config_dir = std::filesystem::path(args.config_path).parent_path();
  const cavex::DeviceSpec dev = resolve_device(cfg, config_dir);
  const Meta meta = make_meta(cfg, args.seed);
  if (!cfg.contains("fit_spurious"))
    throw cavex::ConfigError("config is missing the \"fit_spurious\" block");
  const json& block = cfg.at("fit_spurious");
  const auto data_path = resolve_input(
      require_key(block, "data", "fit_spurious").get<std::string>(), config_dir);
  const int n_spurious = require_key(block, "n_spurious", "fit_spurious").get<int>();
  const double guard = block.value("guard", cavex::dispersive::default_guard);

  std::ifstream in(data_path);
  if (!in)
    throw cavex::ConfigError("cannot open data file \"" + data_path.string() + "\"");
  const std::vector<cavex::fitting::JPoint> data =
      cavex::io::read_j_csv(in, data_path.filename().string());

  const cavex::fitting::FitResult fit =
      cavex::fitting::fit_spurious(data, dev, n_spurious, guard);
  write_fit_json(args.out_dir, "fit_spurious.json", meta, fit);

  auto out = open_output(args.out_dir, "fit_spurious_residuals.csv");
  csv_meta(out, meta);
  out << "f_ge_GHz,J_GHz,sigma_GHz,model_GHz,residual_GHz\n";
  const auto harmonic = cavex::dispersive::ModeSelection::harmonic_only(dev);
  for (const auto& pt : data) {
    double model =
        cavex::dispersive::exchange_j(dev, pt.f_ge, pt.f_ge, harmonic, guard).j_total;
    for (int l = 0; l < n_spurious; ++l) {
      const std::string tag = std::to_string(l + 1);
      model += cavex::fitting::detail::spurious_term(
          pt.f_ge, dev.resonator.f0, fit.params.at("freq_" + tag),
          std::sqrt(std::abs(fit.params.at("product_" + tag))), l);
    }
    out << fmt(pt.f_ge) << ',' << fmt(pt.j) << ',' << fmt(pt.sigma) << ','
        << fmt(model) << ',' << fmt(model - pt.j) << "\n";
  }

  std::cout << "fitted " << n_spurious << " resonance(s), residual rms = "
            << fmt(fit.residual_rms) << " GHz, "
            << (fit.converged ? "converged" : "NOT converged") << "\n";
  return fit.converged ? 0 : 1;
}

// ---- spectrum ---------------------------------------------------------------

struct SpectrumSetup {
  cavex::DeviceSpec dev;
  double f_ge1 = 0.0;
  cavex::FluxMap fmap;
  std::vector<double> flux;
  std::vector<double> f_drive;
  cavex::spectroscopy::DriveSpec drive;
  cavex::spectroscopy::CrossingMapOptions opts;
};

// Bundled crossing-region device: a long ladder with identical qubits so that
// on-crossing dark lines cancel to machine precision.
cavex::DeviceSpec region_device() {
  cavex::DeviceSpec dev;
  dev.resonator = {3.34, 0.00191, 8, "alternating"};
  dev.qubit1 = {0.15, 400.0, 0.04, cavex::End::left};
  dev.qubit2 = {0.15, 400.0, 0.04, cavex::End::right};
  dev.geometry.c_eff = 1.2e8;
  dev.geometry.qubit_separation =
      dev.geometry.c_eff / (2.0 * dev.resonator.f0 * 1e9);
  return dev;
}

// Crossing centers chosen so the whole flux sweep (default slope 0.08) keeps
// both qubits outside the dispersive guard of the nearest mode.
double region_center(const cavex::DeviceSpec& dev, const std::string& region) {
  const double f0 = dev.resonator.f0;
  if (region == "A") return 2.0 * f0 - 0.35;
  if (region == "B") return 2.0 * f0 + 0.35;
  if (region == "C") return 3.0 * f0 - 0.50;
  if (region == "D") return 3.0 * f0 + 0.50;
  throw cavex::ConfigError("region must be one of A, B, C, D, got \"" + region +
                           "\"");
}

std::vector<double> linspace(double a, double b, long n) {
  std::vector<double> out;
  for (long i = 0; i < n; ++i)
    out.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
  return out;
}

SpectrumSetup spectrum_setup(const json& cfg,
                             const std::filesystem::path& config_dir) {
  if (!cfg.contains("spectrum"))
    throw cavex::ConfigError("config is missing the \"spectrum\" block");
  const json& block = cfg.at("spectrum");
  SpectrumSetup s;

  if (block.contains("region")) {
    s.dev = region_device();
    const double fc = region_center(s.dev, block.at("region").get<std::string>());
    s.f_ge1 = fc;
    s.fmap.kind = cavex::FluxMap::Kind::linear;
    s.fmap.slope = block.value("flux_slope", 0.08);
    s.fmap.offset = fc;
    s.flux = linspace(-1.0, 1.0, block.value("flux_points", 41));
    const double hw = block.value("drive_halfwidth", 0.07);
    s.f_drive = linspace(fc - hw, fc + hw, block.value("drive_points", 141));
    s.drive.amplitude = block.value("drive_amplitude", 1e-3);
    s.drive.f_d = fc;
    s.drive.symmetry = cavex::spectroscopy::drive_symmetry(s.dev.geometry, fc);
  } else {
    s.dev = resolve_device(cfg, config_dir);
    s.f_ge1 = require_key(block, "f_ge1", "spectrum").get<double>();
    s.fmap = require_key(block, "flux_map", "spectrum").get<cavex::FluxMap>();
    s.flux = parse_grid(require_key(block, "flux_grid", "spectrum"),
                        "spectrum.flux_grid");
    s.f_drive = parse_grid(require_key(block, "drive_grid", "spectrum"),
                           "spectrum.drive_grid");
    const json& dr = require_key(block, "drive", "spectrum");
    s.drive.amplitude = require_key(dr, "amplitude", "spectrum.drive").get<double>();
    s.drive.f_d = s.f_drive.empty()
                      ? s.f_ge1
                      : 0.5 * (s.f_drive.front() + s.f_drive.back());
    if (dr.contains("symmetry") && dr.at("symmetry").is_number_integer()) {
      s.drive.symmetry = dr.at("symmetry").get<int>();
      if (s.drive.symmetry != 1 && s.drive.symmetry != -1)
        throw cavex::ConfigError("drive.symmetry must be +1, -1 or \"auto\"");
    } else {
      s.drive.symmetry =
          cavex::spectroscopy::drive_symmetry(s.dev.geometry, s.drive.f_d);
    }
  }

  s.opts.gamma_line = block.value("gamma_line", s.opts.gamma_line);
  s.opts.two_photon = block.value("two_photon", false);
  s.opts.two_photon_threshold =
      block.value("two_photon_threshold", s.opts.two_photon_threshold);
  s.opts.guard = block.value("guard", cavex::dispersive::default_guard);
  if (block.contains("j_override"))
    s.opts.j_override = block.at("j_override").get<double>();
  return s;
}

int cmd_spectrum(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  const auto config_dir = std::filesystem::path(args.config_path).parent_path();
  const Meta meta = make_meta(cfg, args.seed);
  const SpectrumSetup s = spectrum_setup(cfg, config_dir);

  const cavex::spectroscopy::CrossingMap cm = cavex::spectroscopy::crossing_map(
      s.dev, s.flux, s.fmap, s.f_ge1, s.drive, s.f_drive, s.opts);

  auto map_out = open_output(args.out_dir, "spectrum_map.csv");
  csv_meta(map_out, meta);
  map_out << "flux,f_drive_GHz,intensity\n";
  for (std::size_t i = 0; i < cm.flux.size(); ++i)
    for (std::size_t k = 0; k < cm.f_drive.size(); ++k)
      map_out << fmt(cm.flux[i]) << ',' << fmt(cm.f_drive[k]) << ','
              << fmt(cm.map[i][k]) << "\n";

  auto lines_out = open_output(args.out_dir, "spectrum_lines.csv");
  csv_meta(lines_out, meta);
  lines_out << "flux,f_ge2_GHz,f_GHz,intensity,label,dark\n";
  if (s.drive.amplitude != 0.0) {
    for (const auto& l : cm.lines)
      lines_out << fmt(l.flux) << ',' << fmt(l.f_ge2) << ',' << fmt(l.f) << ','
                << fmt(l.intensity) << ',' << l.label << ',' << (l.dark ? 1 : 0)
                << "\n";
  }

  std::cout << "wrote spectrum map (" << cm.flux.size() << " x "
            << cm.f_drive.size() << ") and " << "line list\n";
  return 0;
}

// ---- entry ------------------------------------------------------------------

int run_guarded(int (*fn)(const CommonArgs&), const CommonArgs& args) {
  try {
    return fn(args);
  } catch (const cavex::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const cavex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cavex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-qubit exchange through a multi-mode resonator: sweeps, "
               "spectra, and fits"};
  app.require_subcommand(1);

  CommonArgs args;
  int rc = 0;
  auto add_common = [&args](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "run configuration (JSON)")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory (default .)");
    sub->add_option("--seed", args.seed, "seed recorded in output metadata");
    sub->add_option("--threads", args.threads,
                    "worker threads (default: CAVEX_THREADS or 1)");
    sub->add_flag("--exact", args.exact,
                  "include the exact-diagonalization cross-check column");
  };

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const CommonArgs&);
  };
  const Sub subs[] = {
      {"validate", "validate a device description and spot-check the model",
       cmd_validate},
      {"j-sweep", "exchange coupling vs qubit frequency", cmd_j_sweep},
      {"fit-crossing", "fit the avoided-crossing branch model to peak data",
       cmd_fit_crossing},
      {"fit-spurious", "fit extra resonances to exchange-vs-frequency data",
       cmd_fit_spurious},
      {"spectrum", "synthesize a two-tone spectroscopy map", cmd_spectrum},
  };
  for (const Sub& sub : subs) {
    CLI::App* s = app.add_subcommand(sub.name, sub.help);
    add_common(s);
    s->callback([&rc, &args, fn = sub.fn] { rc = run_guarded(fn, args); });
  }

  CLI11_PARSE(app, argc, argv);
  return rc;
}
