// Command-line front end: reproducible simulation + analysis pipelines.
//
// Every run writes its fully-resolved configuration (including the seed)
// next to its outputs; rerunning from that file regenerates the outputs
// bit-identically. Angles are degrees and delays are femtoseconds at every
// file and flag boundary. Exit codes: 0 ok, 2 configuration error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "noon/estimation.hpp"
#include "noon/experiment.hpp"
#include "noon/fields.hpp"
#include "noon/fock.hpp"
#include "noon/io.hpp"
#include "noon/rng.hpp"

namespace fs = std::filesystem;
using namespace noon;
using io::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;  // documented default
constexpr double kPi = std::numbers::pi;

fs::path ensure_out_dir(const std::string& out) {
  if (out.empty()) throw std::domain_error("--out directory is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> fringe_angles(int n_photons, int ell, double start_deg,
                                  double periods, int points) {
  if (n_photons < 1 || n_photons > 2) {
    throw std::domain_error("--n must be 1 or 2");
  }
  if (ell == 0) throw std::domain_error("--ell must be nonzero");
  if (points < 2) throw std::domain_error("need at least 2 angle points");
  if (!(periods > 0.0)) throw std::domain_error("angle span must be positive");
  const double period = 180.0 / (n_photons * std::abs(ell));
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) {
    v[i] = start_deg + periods * period * i / points;
  }
  return v;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) throw std::domain_error("need at least 2 grid points");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
  return v;
}

// ---------------------------------------------------------------------------
// parameter records: defaults <- config file <- command-line flags

struct ScanParams {
  sim::ScanConfig scan;
  sim::SourceModel source;
  sim::LossModel loss;
  double angle_start_deg = 0.0;
  double angle_periods = 1.5;
  int angle_points = 48;
  std::uint64_t seed = kDefaultSeed;
  std::string scheme_name = "orthogonal";
  double delay_fs = std::numeric_limits<double>::quiet_NaN();  // NaN: unset

  void merge(const json& j) {
    if (j.contains("scan")) scan = j["scan"].get<sim::ScanConfig>();
    if (j.contains("source")) source = j["source"].get<sim::SourceModel>();
    if (j.contains("loss")) loss = j["loss"].get<sim::LossModel>();
    angle_start_deg = j.value("angle_start_deg", angle_start_deg);
    angle_periods = j.value("angle_periods", angle_periods);
    angle_points = j.value("angle_points", angle_points);
    seed = j.value("seed", seed);
    scheme_name = io::scheme_name(scan.scheme);
  }
  void finalize() {
    scan.scheme = io::scheme_from_name(scheme_name);
    if (!std::isnan(delay_fs)) source.delay_fs = delay_fs;
    source.heralded = scan.n_photons == 1;
  }
  json resolved(const std::string& command) const {
    json j;
    j["command"] = command;
    j["scan"] = scan;
    j["source"] = source;
    j["loss"] = loss;
    j["angle_start_deg"] = angle_start_deg;
    j["angle_periods"] = angle_periods;
    j["angle_points"] = angle_points;
    j["seed"] = seed;
    return j;
  }
};

void add_scan_options(CLI::App* cmd, ScanParams& p) {
  cmd->add_option("--n", p.scan.n_photons, "photon number (1 or 2)");
  cmd->add_option("--ell", p.scan.ell, "OAM quanta per photon, nonzero");
  cmd->add_option("--scheme", p.scheme_name, "orthogonal | identical");
  cmd->add_option("--time", p.scan.integration_time_s, "integration time per repetition [s]");
  cmd->add_option("--reps", p.scan.repetitions, "repetitions per angle");
  cmd->add_flag("!--no-subtract-accidentals", p.scan.subtract_accidentals,
                "keep raw coincidences");
  cmd->add_option("--pair-rate", p.source.pair_rate_hz, "prepared states per second");
  cmd->add_option("--x", p.source.indistinguishability, "photon indistinguishability in [0,1]");
  cmd->add_option("--delay-fs", p.delay_fs, "source delay; overrides --x via the Gaussian model");
  cmd->add_option("--sigma-fs", p.source.coherence_sigma_fs, "coherence sigma [fs]");
  cmd->add_option("--channel-eta", p.loss.channel_eta, "per-path system efficiency");
  cmd->add_option("--det-eta1", p.loss.detector_eta1, "detector 1 efficiency");
  cmd->add_option("--det-eta2", p.loss.detector_eta2, "detector 2 efficiency");
  cmd->add_option("--window-ns", p.loss.coincidence_window_ns, "coincidence window [ns]");
  cmd->add_option("--dark-rate", p.loss.dark_rate_hz, "dark/stray singles rate [1/s]");
  cmd->add_option("--angle-start", p.angle_start_deg, "first angle [deg]");
  cmd->add_option("--angle-periods", p.angle_periods, "span in fringe periods");
  cmd->add_option("--angle-points", p.angle_points, "number of angles");
  cmd->add_option("--seed", p.seed, "RNG seed (default 12345)");
}

struct RunArtifacts {
  sim::ScanDataset data;
  est::FringeFit fit;
};

RunArtifacts run_scan_pipeline(const ScanParams& p, const fs::path& dir) {
  const auto angles = fringe_angles(p.scan.n_photons, p.scan.ell, p.angle_start_deg,
                                    p.angle_periods, p.angle_points);
  RunArtifacts art{sim::simulate_scan(p.scan, angles, p.loss, p.source, p.seed), {}};
  art.fit = est::fit_fringe(art.data, p.scan.n_photons, p.scan.ell);
  io::write_scan_csv(art.data, dir / "scan.csv");
  io::write_json(io::scan_sidecar(art.data), dir / "scan_meta.json");
  io::write_json(io::fit_report(art.fit), dir / "fit.json");
  io::write_fringe_csv(art.data, art.fit, dir / "fringe.csv");
  return art;
}

int cmd_scan(const ScanParams& p, const std::string& out) {
  const auto dir = ensure_out_dir(out);
  io::write_json(p.resolved("scan"), dir / "config.json");
  const auto art = run_scan_pipeline(p, dir);
  std::printf("scan: N=%d ell=%d visibility %.6f +- %.6f -> %s\n", p.scan.n_photons,
              p.scan.ell, art.fit.visibility, art.fit.visibility_se,
              dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

void write_fisher_csv(const est::FisherCurve& c, const fs::path& path) {
  std::ofstream out(path);
  out << "phi_deg,fisher_per_deg2,mt_fisher,excluded\n";
  for (const auto& pt : c.points) {
    out << io::fmt_double(pt.phi_deg) << "," << io::fmt_double(pt.fisher) << ","
        << io::fmt_double(c.m_total * pt.fisher) << "," << (pt.excluded ? 1 : 0)
        << "\n";
  }
}

void write_uncertainty_csv(const std::vector<est::UncertaintyPoint>& u,
                           const fs::path& path) {
  std::ofstream out(path);
  out << "phi_deg,delta_phi_deg,predicted_delta_phi_deg,usable\n";
  for (const auto& pt : u) {
    out << io::fmt_double(pt.phi_deg) << "," << io::fmt_double(pt.delta_phi_deg)
        << "," << io::fmt_double(pt.predicted_delta_phi_deg) << ","
        << (pt.usable ? 1 : 0) << "\n";
  }
}

void write_crb_csv(const est::CrbReport& r, const fs::path& path) {
  std::ofstream out(path);
  out << "phi_deg,inv_variance,mt_fisher,ratio,midband\n";
  for (const auto& pt : r.points) {
    out << io::fmt_double(pt.phi_deg) << "," << io::fmt_double(pt.inv_variance)
        << "," << io::fmt_double(pt.mt_fisher) << "," << io::fmt_double(pt.ratio)
        << "," << (pt.midband ? 1 : 0) << "\n";
  }
}

int cmd_fisher(const ScanParams& p, const std::string& out) {
  const auto dir = ensure_out_dir(out);
  io::write_json(p.resolved("fisher"), dir / "config.json");
  const auto art = run_scan_pipeline(p, dir);

  const auto fisher = est::fisher_information(art.fit, p.loss, p.scan.n_photons,
                                              p.scan.ell, art.data.axis);
  const auto unc =
      est::angular_uncertainty(art.data, art.fit, p.scan.n_photons, p.scan.ell);
  const auto crb = est::crb_check(fisher, unc);

  write_fisher_csv(fisher, dir / "fisher.csv");
  write_uncertainty_csv(unc, dir / "uncertainty.csv");
  write_crb_csv(crb, dir / "crb.csv");
  json report;
  report["m_total"] = fisher.m_total;
  report["eta"] = fisher.eta;
  report["tolerance"] = crb.tolerance;
  report["fraction_within"] = crb.fraction_within;
  report["median_ratio_midband"] = crb.median_ratio_midband;
  io::write_json(report, dir / "crb.json");
  std::printf("fisher: M_T %.1f, midband CRB ratio %.3f -> %s\n", fisher.m_total,
              crb.median_ratio_midband, dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct SensitivityParams {
  std::vector<int> ells = {1, 2, 3, 5, 10, 25, 50, 100};
  std::vector<int> n_list = {1, 2};
  std::string mode = "ideal";  // ideal: fixed-trials projection; apparatus: Poisson bench
  int trials = 4000;
  int repetitions = 200;
  int angle_points = 48;
  double theory_visibility = 0.9999;
  std::uint64_t seed = kDefaultSeed;
  ScanParams apparatus;  // source/loss knobs for apparatus mode

  void merge(const json& j) {
    ells = j.value("ells", ells);
    n_list = j.value("n_list", n_list);
    mode = j.value("mode", mode);
    trials = j.value("trials", trials);
    repetitions = j.value("repetitions", repetitions);
    angle_points = j.value("angle_points", angle_points);
    theory_visibility = j.value("theory_visibility", theory_visibility);
    seed = j.value("seed", seed);
    if (j.contains("apparatus")) apparatus.merge(j["apparatus"]);
  }
  json resolved() const {
    json j;
    j["command"] = "sensitivity";
    j["ells"] = ells;
    j["n_list"] = n_list;
    j["mode"] = mode;
    j["trials"] = trials;
    j["repetitions"] = repetitions;
    j["angle_points"] = angle_points;
    j["theory_visibility"] = theory_visibility;
    j["seed"] = seed;
    if (mode == "apparatus") j["apparatus"] = apparatus.resolved("scan");
    return j;
  }
};

int cmd_sensitivity(const SensitivityParams& p, const std::string& out) {
  if (p.mode != "ideal" && p.mode != "apparatus") {
    throw std::domain_error("--mode must be ideal or apparatus");
  }
  const auto dir = ensure_out_dir(out);
  io::write_json(p.resolved(), dir / "config.json");

  struct RunSpec {
    int n, ell;
  };
  std::vector<RunSpec> specs;
  for (int n : p.n_list) {
    for (int ell : p.ells) specs.push_back({n, ell});
  }

  // fan out; every run derives its own seed, so scheduling cannot matter
  std::vector<std::future<est::FittedRun>> futures;
  futures.reserve(specs.size());
  for (const auto& spec : specs) {
    futures.push_back(std::async(std::launch::async, [&, spec] {
      const std::uint64_t run_seed = rng::derive(p.seed, spec.n, spec.ell);
      const auto angles =
          fringe_angles(spec.n, spec.ell, 0.0, 1.5, p.angle_points);
      sim::ScanDataset data;
      if (p.mode == "ideal") {
        data = sim::simulate_projection_scan(spec.n, spec.ell, p.trials,
                                             p.repetitions, angles, run_seed);
      } else {
        ScanParams ap = p.apparatus;
        ap.scan.n_photons = spec.n;
        ap.scan.ell = spec.ell;
        ap.scan.repetitions = p.repetitions;
        ap.finalize();
        data = sim::simulate_scan(ap.scan, angles, ap.loss, ap.source, run_seed);
      }
      auto fit = est::fit_fringe(data, spec.n, spec.ell);
      const fs::path run_dir =
          dir / ("run_n" + std::to_string(spec.n) + "_l" + std::to_string(spec.ell));
      fs::create_directories(run_dir);
      io::write_scan_csv(data, run_dir / "scan.csv");
      io::write_json(io::fit_report(fit), run_dir / "fit.json");
      io::write_fringe_csv(data, fit, run_dir / "fringe.csv");
      return est::FittedRun{std::move(data), std::move(fit)};
    }));
  }
  std::vector<est::FittedRun> runs;
  runs.reserve(futures.size());
  for (auto& f : futures) runs.push_back(f.get());

  const auto table = est::sensitivity_table(runs);
  {
    std::ofstream csv(dir / "sensitivity.csv");
    csv << "n_photons,ell,phi_at_best_deg,delta_phi_deg,normalized_sensitivity_per_deg\n";
    for (const auto& pt : table.points) {
      csv << pt.n_photons << "," << pt.ell << "," << io::fmt_double(pt.phi_at_best_deg)
          << "," << io::fmt_double(pt.delta_phi_deg) << ","
          << io::fmt_double(pt.normalized_sensitivity) << "\n";
    }
  }
  {
    std::ofstream csv(dir / "theory.csv");
    csv << "n_photons,ell,theory_sensitivity_per_deg\n";
    for (int n : p.n_list) {
      for (int ell : p.ells) {
        csv << n << "," << ell << ","
            << io::fmt_double(
                   est::theory_normalized_sensitivity(n, ell, p.theory_visibility))
            << "\n";
      }
    }
  }
  const auto report = est::scaling_report(table.points);
  json scaling;
  for (const auto& [n, slope] : report.slope) {
    scaling["slope"][std::to_string(n)] = slope;
    scaling["slope_stderr"][std::to_string(n)] = report.slope_stderr.at(n);
  }
  scaling["ratio_n2_over_n1"] = report.ratio_n2_over_n1;
  scaling["warnings"] = table.warnings;
  io::write_json(scaling, dir / "scaling.json");

  std::printf("sensitivity: %zu runs", runs.size());
  for (const auto& [n, slope] : report.slope) std::printf(", slope(N=%d) %.3f", n, slope);
  std::printf(", ratio %.3f -> %s\n", report.ratio_n2_over_n1, dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct HomParams2 {
  sim::SourceModel source;
  sim::LossModel loss;
  sim::HomParams hom;
  double delay_start_fs = -1200.0;
  double delay_stop_fs = 1200.0;
  int delay_points = 49;
  std::uint64_t seed = kDefaultSeed;

  void merge(const json& j) {
    if (j.contains("source")) source = j["source"].get<sim::SourceModel>();
    if (j.contains("loss")) loss = j["loss"].get<sim::LossModel>();
    hom.integration_time_s = j.value("integration_time_s", hom.integration_time_s);
    hom.repetitions = j.value("repetitions", hom.repetitions);
    hom.subtract_accidentals = j.value("subtract_accidentals", hom.subtract_accidentals);
    delay_start_fs = j.value("delay_start_fs", delay_start_fs);
    delay_stop_fs = j.value("delay_stop_fs", delay_stop_fs);
    delay_points = j.value("delay_points", delay_points);
    seed = j.value("seed", seed);
  }
  json resolved() const {
    json j;
    j["command"] = "hom";
    j["source"] = source;
    j["loss"] = loss;
    j["integration_time_s"] = hom.integration_time_s;
    j["repetitions"] = hom.repetitions;
    j["subtract_accidentals"] = hom.subtract_accidentals;
    j["delay_start_fs"] = delay_start_fs;
    j["delay_stop_fs"] = delay_stop_fs;
    j["delay_points"] = delay_points;
    j["seed"] = seed;
    return j;
  }
};

int cmd_hom(const HomParams2& p, const std::string& out) {
  const auto dir = ensure_out_dir(out);
  io::write_json(p.resolved(), dir / "config.json");

  const auto delays = linspace(p.delay_start_fs, p.delay_stop_fs, p.delay_points);
  const auto data = sim::hom_scan(delays, p.source, p.loss, p.hom, p.seed);
  io::write_scan_csv(data, dir / "hom.csv");
  io::write_json(io::scan_sidecar(data), dir / "hom_meta.json");

  const auto dip = est::fit_hom_dip(data);
  json report;
  report["baseline"] = dip.baseline;
  report["visibility"] = dip.visibility;
  report["visibility_se"] = dip.visibility_se;
  report["center_fs"] = dip.center_fs;
  report["sigma_fs"] = dip.sigma_fs;
  report["weighted_rss"] = dip.weighted_rss;
  io::write_json(report, dir / "dipfit.json");
  std::printf("hom: dip visibility %.4f +- %.4f, center %.1f fs -> %s\n",
              dip.visibility, dip.visibility_se, dip.center_fs, dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

struct HoloParams {
  int ell = 2;
  std::string kind = "m1";  // oam+ | oam- | m1 | m2
  int width_px = 1024;
  int height_px = 1024;
  double half_extent_mm = 2.0;
  double grating_period_px = 8.0;
  double phase_depth = 2.0 * kPi;
  bool carve = false;
  bool dump_field = false;

  void merge(const json& j) {
    ell = j.value("ell", ell);
    kind = j.value("kind", kind);
    width_px = j.value("width_px", width_px);
    height_px = j.value("height_px", height_px);
    half_extent_mm = j.value("half_extent_mm", half_extent_mm);
    grating_period_px = j.value("grating_period_px", grating_period_px);
    phase_depth = j.value("phase_depth", phase_depth);
    carve = j.value("carve", carve);
    dump_field = j.value("dump_field", dump_field);
  }
  json resolved() const {
    json j;
    j["command"] = "holo";
    j["ell"] = ell;
    j["kind"] = kind;
    j["width_px"] = width_px;
    j["height_px"] = height_px;
    j["half_extent_mm"] = half_extent_mm;
    j["grating_period_px"] = grating_period_px;
    j["phase_depth"] = phase_depth;
    j["carve"] = carve;
    j["dump_field"] = dump_field;
    return j;
  }
};

int cmd_holo(const HoloParams& p, const std::string& out) {
  const auto dir = ensure_out_dir(out);
  io::write_json(p.resolved(), dir / "config.json");

  const fields::GridSpec grid{p.width_px, p.height_px, p.half_extent_mm};
  fields::SampledField field;
  if (p.kind == "oam+") {
    field = fields::synth_oam(std::abs(p.ell), grid);
  } else if (p.kind == "oam-") {
    field = fields::synth_oam(-std::abs(p.ell), grid);
  } else if (p.kind == "m1") {
    field = fields::synth_petal(p.ell, fields::Petal::M1, grid);
  } else if (p.kind == "m2") {
    field = fields::synth_petal(p.ell, fields::Petal::M2, grid);
  } else {
    throw std::domain_error("--kind must be oam+, oam-, m1 or m2");
  }

  fields::HologramSpec spec;
  spec.grating_period_px = p.grating_period_px;
  spec.phase_depth = p.phase_depth;
  spec.masking = p.carve ? fields::HologramSpec::Masking::Carve
                         : fields::HologramSpec::Masking::None;
  fields::export_hologram(field, spec, dir / "hologram.pgm");
  if (p.dump_field) fields::write_field_csv(field, dir / "field.csv");

  // sampled-field MUB overlaps against the exact transform
  const auto fp = fields::synth_oam(std::abs(p.ell), grid);
  const auto fm = fields::synth_oam(-std::abs(p.ell), grid);
  const auto m1 = fields::synth_petal(p.ell, fields::Petal::M1, grid);
  const auto m2 = fields::synth_petal(p.ell, fields::Petal::M2, grid);
  const auto h = fock::hadamard_mub();
  const fields::cplx entries[2][2] = {
      {fields::overlap(fp, m1), fields::overlap(fp, m2)},
      {fields::overlap(fm, m1), fields::overlap(fm, m2)}};
  double max_err = 0.0;
  json matrix = json::array();
  for (int r = 0; r < 2; ++r) {
    json row = json::array();
    for (int c = 0; c < 2; ++c) {
      row.push_back({{"re", entries[r][c].real()}, {"im", entries[r][c].imag()}});
      max_err = std::max(max_err, std::abs(entries[r][c] - h(r, c)));
    }
    matrix.push_back(row);
  }
  json report;
  report["ell"] = p.ell;
  report["overlap_matrix"] = matrix;
  report["max_error_vs_hadamard"] = max_err;
  io::write_json(report, dir / "mub_report.json");
  std::printf("holo: ell=%d %s, MUB max error %.2e -> %s\n", p.ell, p.kind.c_str(),
              max_err, dir.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_verify(std::uint64_t seed) {
  int failures = 0;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    std::printf("[%s] %s (%s)\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  };
  char buf[160];

  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto bunched =
        fock::lift_and_apply(fock::hadamard_mub(), fock::TwoModeFockState::basis(2, 1, 1));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    double err = std::abs(bunched.amplitude(2) - fock::cplx(inv_sqrt2, 0.0));
    err = std::max(err, std::abs(bunched.amplitude(0) + fock::cplx(inv_sqrt2, 0.0)));
    err = std::max(err, std::abs(bunched.amplitude(1)));
    const double us = std::chrono::duration<double, std::micro>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    std::snprintf(buf, sizeof buf, "H2|1,1> -> (|2,0>-|0,2>)/sqrt2, max error %.2e, %.0f us",
                  err, us);
    report(err < 1e-12, "bunching identity", buf);
  }
  {
    auto eng = rng::engine(seed, 1);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int n = 1; n <= fock::kMaxPhotons; ++n) {
      for (int t = 0; t < 100; ++t) {
        Eigen::Matrix2cd m;
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 2; ++c) m(r, c) = fock::cplx(g(eng), g(eng));
        }
        const fock::ModeUnitary u =
            Eigen::HouseholderQR<Eigen::Matrix2cd>(m).householderQ();
        std::vector<fock::cplx> amps(n + 1);
        for (auto& a : amps) a = fock::cplx(g(eng), g(eng));
        const auto s = fock::TwoModeFockState::normalized(1, std::move(amps));
        worst = std::max(worst, std::abs(fock::lift_and_apply(u, s).norm() - 1.0));
      }
    }
    std::snprintf(buf, sizeof buf, "800 random lifts N<=8, worst |norm-1| %.2e", worst);
    report(worst < 1e-12, "norm preservation", buf);
  }
  {
    double worst = 0.0;
    for (int n : {1, 2}) {
      for (int ell : {1, 2, 3, 5, 10, 25, 50, 100}) {
        std::vector<fock::cplx> amps(n + 1, fock::cplx(0, 0));
        amps.front() = amps.back() = 1.0 / std::sqrt(2.0);
        const fock::TwoModeFockState psi0(ell, amps);
        for (int i = 0; i <= 720; ++i) {
          const double phi = i * 2.0 * kPi / 720.0;
          const double p =
              fock::projection_probability(fock::make_noon(n, ell, phi), psi0);
          worst = std::max(
              worst, std::abs(p - 0.5 * (1.0 - std::cos(2.0 * n * ell * phi))));
        }
      }
    }
    std::snprintf(buf, sizeof buf,
                  "16 (N,ell) combos x 721 angles vs (1-cos)/2, max error %.2e", worst);
    report(worst < 1e-10, "projection fringe", buf);
  }
  {
    double worst = 0.0;
    for (int n : {1, 2, 3}) {
      for (double phi : {0.1, 0.9, 2.3}) {
        const auto rotated = fock::lift_and_apply(fock::rotation_unitary(3, phi),
                                                  fock::make_noon(n, 3, 0.0));
        const auto direct = fock::make_noon(n, 3, phi);
        const auto ov = fock::inner_product(rotated, direct);
        const fock::cplx phase = ov / std::abs(ov);
        for (int k = 0; k <= n; ++k) {
          worst = std::max(worst, std::abs(phase * rotated.amplitude(k) -
                                           direct.amplitude(k)));
        }
      }
    }
    std::snprintf(buf, sizeof buf, "rotation lift vs direct phase, max error %.2e", worst);
    report(worst < 1e-12, "rotation equivalence", buf);
  }
  {
    const auto w = sim::witness_scan(sim::WitnessState::IdealNoon, 1, 0, 0);
    std::snprintf(buf, sizeof buf, "ideal N00N witness w = %.6f", w.w);
    report(std::abs(w.w - 3.0) < 1e-9, "witness upper point", buf);
  }
  std::printf(failures == 0 ? "all checks passed\n" : "%d check(s) failed\n", failures);
  return failures == 0 ? 0 : 3;
}

std::optional<json> preload_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      return io::read_json(argv[i + 1]);
    }
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "twisted-N00N rotation metrology: simulation and analysis pipelines"};
  app.require_subcommand(1);

  ScanParams scan_params, fisher_params;
  SensitivityParams sens_params;
  HomParams2 hom_params;
  HoloParams holo_params;
  std::string out_scan, out_fisher, out_sens, out_hom, out_holo;
  std::string config_path;  // consumed via preload
  std::uint64_t verify_seed = kDefaultSeed;

  std::optional<json> preset;
  try {
    preset = preload_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  auto* scan = app.add_subcommand("scan", "simulate a rotation scan and fit the fringe");
  if (preset) scan_params.merge(*preset);
  add_scan_options(scan, scan_params);
  scan->add_option("--config", config_path, "JSON config; flags override");
  scan->add_option("--out", out_scan, "output directory")->required();

  auto* fisher = app.add_subcommand(
      "fisher", "scan + fit + Fisher information + uncertainty + CRB check");
  if (preset) fisher_params.merge(*preset);
  add_scan_options(fisher, fisher_params);
  fisher->add_option("--config", config_path, "JSON config; flags override");
  fisher->add_option("--out", out_fisher, "output directory")->required();

  auto* sens = app.add_subcommand(
      "sensitivity", "sweep (N, ell), collect normalized sensitivities and scaling");
  if (preset) sens_params.merge(*preset);
  sens->add_option("--ells", sens_params.ells, "OAM values to sweep");
  sens->add_option("--n-list", sens_params.n_list, "photon numbers to sweep");
  sens->add_option("--mode", sens_params.mode, "ideal | apparatus");
  sens->add_option("--trials", sens_params.trials, "states per repetition (ideal mode)");
  sens->add_option("--reps", sens_params.repetitions, "repetitions per angle");
  sens->add_option("--angle-points", sens_params.angle_points, "angles per run");
  sens->add_option("--theory-visibility", sens_params.theory_visibility,
                   "visibility of the theory curve");
  sens->add_option("--seed", sens_params.seed, "RNG seed (default 12345)");
  sens->add_option("--config", config_path, "JSON config; flags override");
  sens->add_option("--out", out_sens, "output directory")->required();

  auto* hom = app.add_subcommand("hom", "Hong-Ou-Mandel delay scan and dip fit");
  if (preset) hom_params.merge(*preset);
  hom->add_option("--pair-rate", hom_params.source.pair_rate_hz, "pairs per second");
  hom->add_option("--x", hom_params.source.indistinguishability,
                  "zero-delay indistinguishability ceiling");
  hom->add_option("--sigma-fs", hom_params.source.coherence_sigma_fs,
                  "coherence sigma [fs]");
  hom->add_option("--channel-eta", hom_params.loss.channel_eta, "per-path efficiency");
  hom->add_option("--det-eta1", hom_params.loss.detector_eta1, "detector 1 efficiency");
  hom->add_option("--det-eta2", hom_params.loss.detector_eta2, "detector 2 efficiency");
  hom->add_option("--window-ns", hom_params.loss.coincidence_window_ns,
                  "coincidence window [ns]");
  hom->add_option("--dark-rate", hom_params.loss.dark_rate_hz, "dark rate [1/s]");
  hom->add_option("--time", hom_params.hom.integration_time_s, "integration time [s]");
  hom->add_option("--reps", hom_params.hom.repetitions, "repetitions per delay");
  hom->add_option("--delay-start", hom_params.delay_start_fs, "first delay [fs]");
  hom->add_option("--delay-stop", hom_params.delay_stop_fs, "last delay [fs]");
  hom->add_option("--delay-points", hom_params.delay_points, "number of delays");
  hom->add_option("--seed", hom_params.seed, "RNG seed (default 12345)");
  hom->add_option("--config", config_path, "JSON config; flags override");
  hom->add_option("--out", out_hom, "output directory")->required();

  auto* holo = app.add_subcommand("holo", "render petal/OAM holograms and the MUB report");
  if (preset) holo_params.merge(*preset);
  holo->add_option("--ell", holo_params.ell, "OAM quanta, nonzero");
  holo->add_option("--kind", holo_params.kind, "oam+ | oam- | m1 | m2");
  holo->add_option("--width", holo_params.width_px, "grid width [px]");
  holo->add_option("--height", holo_params.height_px, "grid height [px]");
  holo->add_option("--half-extent-mm", holo_params.half_extent_mm, "aperture half width [mm]");
  holo->add_option("--period-px", holo_params.grating_period_px, "blazed grating period");
  holo->add_option("--phase-depth", holo_params.phase_depth, "phase depth (0, 2pi]");
  holo->add_flag("--carve", holo_params.carve, "binary amplitude carving");
  holo->add_flag("--dump-field", holo_params.dump_field, "also write field.csv");
  holo->add_option("--config", config_path, "JSON config; flags override");
  holo->add_option("--out", out_holo, "output directory")->required();

  auto* verify = app.add_subcommand(
      "noon-verify", "run the Fock-algebra invariant checks and print pass/fail lines");
  verify->add_option("--seed", verify_seed, "RNG seed (default 12345)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (scan->parsed()) {
      scan_params.finalize();
      return cmd_scan(scan_params, out_scan);
    }
    if (fisher->parsed()) {
      fisher_params.finalize();
      return cmd_fisher(fisher_params, out_fisher);
    }
    if (sens->parsed()) {
      sens_params.apparatus.finalize();
      return cmd_sensitivity(sens_params, out_sens);
    }
    if (hom->parsed()) return cmd_hom(hom_params, out_hom);
    if (holo->parsed()) return cmd_holo(holo_params, out_holo);
    if (verify->parsed()) return cmd_verify(verify_seed);
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
