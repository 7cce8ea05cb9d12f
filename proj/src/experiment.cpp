#include "noon/experiment.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "noon/fock.hpp"
#include "noon/rng.hpp"

namespace noon::sim {

using fock::cplx;
using fock::ModeUnitary;
using fock::TwoModeFockState;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Single-photon mode, amplitudes over {+l, -l}.
struct Mode1 {
  cplx plus{0.0, 0.0};
  cplx minus{0.0, 0.0};
};

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Mode1 oam_plus() { return {1.0, 0.0}; }
Mode1 oam_minus() { return {0.0, 1.0}; }
Mode1 petal_m1() { return {kInvSqrt2, kInvSqrt2}; }
Mode1 petal_m2() { return {kInvSqrt2, -kInvSqrt2}; }
Mode1 circ_plus() { return {kInvSqrt2, cplx(0.0, kInvSqrt2)}; }
Mode1 circ_minus() { return {kInvSqrt2, cplx(0.0, -kInvSqrt2)}; }

Mode1 orthogonal_complement(const Mode1& m) {
  return {-std::conj(m.minus), std::conj(m.plus)};
}

cplx mode_overlap(const Mode1& a, const Mode1& b) {
  return std::conj(a.plus) * b.plus + std::conj(a.minus) * b.minus;
}

// |1 photon in mode m> as a two-mode Fock state.
TwoModeFockState single_photon_state(const Mode1& m, int ell) {
  return TwoModeFockState::normalized(ell, {m.minus, m.plus});
}

ModeUnitary columns(const Mode1& c1, const Mode1& c2) {
  ModeUnitary u;
  u(0, 0) = c1.plus;
  u(1, 0) = c1.minus;
  u(0, 1) = c2.plus;
  u(1, 1) = c2.minus;
  return u;
}

// Coincidence probability for indistinguishable photons in state psi, split
// probabilistically and projected onto t1 and t2: |<0| a_{t1} a_{t2} psi>|^2/4.
// The detection state a†_{t1} a†_{t2}|0> is built with the Fock lift.
double pair_coincidence_bosonic(const TwoModeFockState& psi, const Mode1& t1,
                                const Mode1& t2) {
  const double ov = std::abs(mode_overlap(t1, t2));
  const int ell = psi.ell();
  if (ov < 1e-9) {
    // orthogonal pair: a†_{t1} a†_{t2}|0> = lift([t1 t2]) |1,1>
    const TwoModeFockState t =
        fock::lift_and_apply(columns(t1, t2), TwoModeFockState::basis(2, 1, ell));
    return std::norm(fock::inner_product(t, psi)) / 4.0;
  }
  if (ov > 1.0 - 1e-9) {
    // identical pair: a†_{t1}^2 |0> = sqrt(2) lift([t1 t1_perp]) |2,0>
    const TwoModeFockState t = fock::lift_and_apply(
        columns(t1, orthogonal_complement(t1)), TwoModeFockState::basis(2, 2, ell));
    return std::norm(fock::inner_product(t, psi)) / 2.0;
  }
  throw std::domain_error("projection pair must be orthogonal or identical");
}

// Same event for fully distinguishable photons prepared in pA and pB:
// independent routing through the splitter, no interference cross terms.
double pair_coincidence_distinguishable(int ell, const Mode1& t1, const Mode1& t2,
                                        const TwoModeFockState& pA,
                                        const TwoModeFockState& pB) {
  const TwoModeFockState s1 = single_photon_state(t1, ell);
  const TwoModeFockState s2 = single_photon_state(t2, ell);
  const double a1 = fock::projection_probability(pA, s1);
  const double a2 = fock::projection_probability(pB, s2);
  const double b1 = fock::projection_probability(pB, s1);
  const double b2 = fock::projection_probability(pA, s2);
  return 0.25 * (a1 * a2 + b1 * b2);
}

// Two-photon coincidence with partial indistinguishability x; the state is
// rotated by phi, the projection holograms stay fixed.
double pair_coincidence(int ell, double phi, const Mode1& t1, const Mode1& t2,
                        double x) {
  const double p_bos =
      pair_coincidence_bosonic(fock::make_noon(2, ell, phi), t1, t2);
  double p_dist = 0.0;
  if (x < 1.0) {
    const ModeUnitary rot = fock::rotation_unitary(ell, phi);
    const TwoModeFockState prep_a =
        fock::lift_and_apply(rot, single_photon_state(petal_m1(), ell));
    const TwoModeFockState prep_b =
        fock::lift_and_apply(rot, single_photon_state(petal_m2(), ell));
    p_dist = pair_coincidence_distinguishable(ell, t1, t2, prep_a, prep_b);
  }
  return x * p_bos + (1.0 - x) * p_dist;
}

void check_x(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("indistinguishability must lie in [0, 1]");
  }
}

void check_axis(const std::vector<double>& axis, const char* what) {
  if (axis.empty()) {
    throw std::domain_error(std::string(what) + " list is empty");
  }
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) {
      throw std::domain_error(std::string(what) + " values must be strictly increasing");
    }
  }
}

double poisson_draw(std::mt19937_64& eng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long> dist(mean);
  return static_cast<double>(dist(eng));
}

struct AccidentalModel {
  double rate_hz = 0.0;  // stationary: singles1 * singles2 * window
};

AccidentalModel accidentals(const ScanConfig& config, const LossModel& loss,
                            const SourceModel& source) {
  // Each photon of the pair reaches its detector through the channel; for
  // two-photon runs the splitter routes it to either arm with probability 1/2.
  const double route = (config.n_photons == 2) ? 0.5 : 1.0;
  const double s1 = source.pair_rate_hz * loss.channel_eta * loss.detector_eta1 * route +
                    loss.dark_rate_hz;
  const double s2 = source.pair_rate_hz * loss.channel_eta * loss.detector_eta2 * route +
                    loss.dark_rate_hz;
  return {s1 * s2 * loss.coincidence_window_ns * 1e-9};
}

}  // namespace

double transform_limited_sigma_fs(double center_wavelength_nm,
                                  double fwhm_bandwidth_nm) {
  const double lambda = center_wavelength_nm * 1e-9;
  const double dlambda = fwhm_bandwidth_nm * 1e-9;
  const double fwhm_omega = 2.0 * kPi * kSpeedOfLight * dlambda / (lambda * lambda);
  const double sigma_omega = fwhm_omega / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  return 1e15 / (std::sqrt(2.0) * sigma_omega);
}

double SourceModel::x_at_delay(double tau_fs) const {
  const double s = coherence_sigma_fs;
  if (!(s > 0.0)) throw std::domain_error("coherence sigma must be positive");
  return indistinguishability * std::exp(-tau_fs * tau_fs / (2.0 * s * s));
}

double SourceModel::effective_x() const {
  check_x(indistinguishability);
  return delay_fs ? x_at_delay(*delay_fs) : indistinguishability;
}

double LossModel::eta_total(int n_photons) const {
  auto check = [](double eta, const char* name) {
    if (!(eta > 0.0 && eta <= 1.0)) {
      throw std::domain_error(std::string(name) + " efficiency must lie in (0, 1]");
    }
  };
  check(channel_eta, "channel");
  check(detector_eta1, "detector 1");
  check(detector_eta2, "detector 2");
  if (n_photons == 1) return channel_eta * detector_eta1 * detector_eta2;
  if (n_photons == 2) {
    return channel_eta * channel_eta * detector_eta1 * detector_eta2;
  }
  throw std::domain_error("loss model supports N = 1 or 2");
}

LossModel reference_loss_single() { return {0.026, 0.75, 0.74, 1.0, 0.0}; }
LossModel reference_loss_pair() { return {0.0201, 0.75, 0.74, 1.0, 0.0}; }

double ScanDataset::mean(std::size_t i) const {
  const auto& reps = counts.at(i);
  double acc = 0.0;
  for (double c : reps) acc += c;
  return reps.empty() ? 0.0 : acc / static_cast<double>(reps.size());
}

double ScanDataset::sample_variance(std::size_t i) const {
  const auto& reps = counts.at(i);
  if (reps.size() < 2) return 0.0;
  const double m = mean(i);
  double acc = 0.0;
  for (double c : reps) acc += (c - m) * (c - m);
  return acc / static_cast<double>(reps.size() - 1);
}

void ScanDataset::validate() const {
  check_axis(axis, axis_label.c_str());
  if (counts.size() != axis.size()) {
    throw std::domain_error("counts rows must match the axis length");
  }
  for (const auto& reps : counts) {
    for (double c : reps) {
      if (!accidentals_subtracted && c < 0.0) {
        throw std::domain_error("raw counts must be non-negative");
      }
    }
  }
}

double coincidence_probability(int n_photons, int ell, double phi,
                               ProjectionScheme scheme, double x) {
  check_x(x);
  if (n_photons == 1) {
    // Heralded single photon through one rotated hologram; the scheme picks
    // the petal orthogonal or identical to the prepared structure.
    const TwoModeFockState psi = fock::make_noon(1, ell, phi);
    const Mode1 target =
        (scheme == ProjectionScheme::Orthogonal) ? petal_m1() : petal_m2();
    return fock::projection_probability(psi, single_photon_state(target, ell));
  }
  if (n_photons == 2) {
    const Mode1 t1 = petal_m1();
    const Mode1 t2 =
        (scheme == ProjectionScheme::Orthogonal) ? petal_m2() : petal_m1();
    return pair_coincidence(ell, phi, t1, t2, x);
  }
  throw std::domain_error(
      "splitting combinatorics implemented for N = 1 and 2 only");
}

ScanDataset simulate_scan(const ScanConfig& config,
                          const std::vector<double>& angles_deg,
                          const LossModel& loss, const SourceModel& source,
                          std::uint64_t seed) {
  check_axis(angles_deg, "angle");
  if (config.repetitions < 1) throw std::domain_error("repetitions must be >= 1");
  if (!(config.integration_time_s > 0.0)) {
    throw std::domain_error("integration time must be positive");
  }
  if (!(source.pair_rate_hz >= 0.0)) {
    throw std::domain_error("pair rate must be non-negative");
  }
  const double eta = loss.eta_total(config.n_photons);
  const double x = source.effective_x();
  const AccidentalModel acc = accidentals(config, loss, source);
  const double t = config.integration_time_s;

  ScanDataset ds;
  ds.config = config;
  ds.axis = angles_deg;
  ds.axis_label = "angle_deg";
  ds.accidentals_subtracted = config.subtract_accidentals;
  ds.counts.resize(angles_deg.size());

  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    const double phi = angles_deg[i] * kPi / 180.0;
    const double p =
        coincidence_probability(config.n_photons, config.ell, phi, config.scheme, x);
    const double rate = eta * source.pair_rate_hz * p;
    if (rate < 0.0) throw std::domain_error("negative detection rate");
    const double mean_counts = (rate + acc.rate_hz) * t;
    auto& reps = ds.counts[i];
    reps.resize(config.repetitions);
    for (int r = 0; r < config.repetitions; ++r) {
      auto eng = rng::engine(seed, i, static_cast<std::uint64_t>(r));
      double c = poisson_draw(eng, mean_counts);
      if (config.subtract_accidentals) c -= acc.rate_hz * t;
      reps[r] = c;
    }
  }
  ds.validate();
  return ds;
}

ScanDataset simulate_projection_scan(int n_photons, int ell, int trials_per_rep,
                                     int repetitions,
                                     const std::vector<double>& angles_deg,
                                     std::uint64_t seed) {
  check_axis(angles_deg, "angle");
  if (trials_per_rep < 1) throw std::domain_error("trials must be >= 1");
  if (repetitions < 1) throw std::domain_error("repetitions must be >= 1");

  std::vector<cplx> target_amps(n_photons + 1, cplx(0.0, 0.0));
  target_amps.front() = kInvSqrt2;
  target_amps.back() = kInvSqrt2;
  const TwoModeFockState psi0(ell, std::move(target_amps));

  ScanDataset ds;
  ds.config = {n_photons, ell, ProjectionScheme::Orthogonal, 0.0, repetitions, false};
  ds.axis = angles_deg;
  ds.axis_label = "angle_deg";
  ds.counts.resize(angles_deg.size());

  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    const double phi = angles_deg[i] * kPi / 180.0;
    const double p =
        fock::projection_probability(fock::make_noon(n_photons, ell, phi), psi0);
    auto& reps = ds.counts[i];
    reps.resize(repetitions);
    std::binomial_distribution<long> dist(trials_per_rep,
                                          std::clamp(p, 0.0, 1.0));
    for (int r = 0; r < repetitions; ++r) {
      auto eng = rng::engine(seed, i, static_cast<std::uint64_t>(r));
      reps[r] = static_cast<double>(dist(eng));
    }
  }
  ds.validate();
  return ds;
}

ScanDataset hom_scan(const std::vector<double>& delays_fs,
                     const SourceModel& source, const LossModel& loss,
                     const HomParams& params, std::uint64_t seed) {
  check_axis(delays_fs, "delay");
  if (params.repetitions < 1) throw std::domain_error("repetitions must be >= 1");
  if (!(params.integration_time_s > 0.0)) {
    throw std::domain_error("integration time must be positive");
  }
  const double eta = loss.eta_total(2);
  ScanConfig cfg{2, 1, ProjectionScheme::Orthogonal, params.integration_time_s,
                 params.repetitions, params.subtract_accidentals};
  const AccidentalModel acc = accidentals(cfg, loss, source);
  const double t = params.integration_time_s;

  ScanDataset ds;
  ds.config = cfg;
  ds.axis = delays_fs;
  ds.axis_label = "delay_fs";
  ds.accidentals_subtracted = params.subtract_accidentals;
  ds.counts.resize(delays_fs.size());

  for (std::size_t i = 0; i < delays_fs.size(); ++i) {
    const double x = source.x_at_delay(delays_fs[i]);
    // photons projected independently onto +l and -l
    const double p = pair_coincidence(1, 0.0, oam_plus(), oam_minus(), x);
    const double mean_counts = (eta * source.pair_rate_hz * p + acc.rate_hz) * t;
    auto& reps = ds.counts[i];
    reps.resize(params.repetitions);
    for (int r = 0; r < params.repetitions; ++r) {
      auto eng = rng::engine(seed, i, static_cast<std::uint64_t>(r));
      double c = poisson_draw(eng, mean_counts);
      if (params.subtract_accidentals) c -= acc.rate_hz * t;
      reps[r] = c;
    }
  }
  ds.validate();
  return ds;
}

WitnessResult witness_scan(WitnessState state, int ell, long trials_per_setting,
                           std::uint64_t seed) {
  const std::array<std::array<Mode1, 2>, 3> bases = {{
      {oam_plus(), oam_minus()},
      {petal_m1(), petal_m2()},
      {circ_plus(), circ_minus()},
  }};

  auto setting_probability = [&](const Mode1& t1, const Mode1& t2) {
    switch (state) {
      case WitnessState::IdealNoon:
        return pair_coincidence_bosonic(fock::make_noon(2, ell, 0.0), t1, t2);
      case WitnessState::SeparableProduct:
        return pair_coincidence_distinguishable(
            ell, t1, t2, single_photon_state(oam_plus(), ell),
            single_photon_state(oam_minus(), ell));
      case WitnessState::DephasedMixture:
        return 0.5 * (pair_coincidence_bosonic(
                          TwoModeFockState::basis(2, 2, ell), t1, t2) +
                      pair_coincidence_bosonic(
                          TwoModeFockState::basis(2, 0, ell), t1, t2));
    }
    throw std::domain_error("unknown witness input state");
  };

  WitnessResult result;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    double c[2][2];
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double p = setting_probability(bases[b][i], bases[b][j]);
        if (trials_per_setting > 0) {
          auto eng = rng::engine(seed, b, static_cast<std::uint64_t>(2 * i + j));
          c[i][j] = poisson_draw(eng, p * static_cast<double>(trials_per_setting));
        } else {
          c[i][j] = p;
        }
      }
    }
    const double total = c[0][0] + c[0][1] + c[1][0] + c[1][1];
    const double vis =
        total > 0.0 ? std::abs(c[0][0] + c[1][1] - c[0][1] - c[1][0]) / total : 0.0;
    result.basis_visibility[b] = vis;
    result.w += vis;
  }
  return result;
}

}  // namespace noon::sim
