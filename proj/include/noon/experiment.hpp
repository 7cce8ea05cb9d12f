#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Stochastic simulation of the full bench: pair generation with partial
// distinguishability, N00N preparation, probabilistic splitting, rotated
// projections, lossy Poissonian counting, accidentals, scan generation,
// and the entanglement witness.

namespace noon::sim {

/// Temporal sigma (fs) of the Gaussian indistinguishability model for a
/// transform-limited wavepacket with the given intensity-FWHM bandwidth.
double transform_limited_sigma_fs(double center_wavelength_nm = 810.0,
                                  double fwhm_bandwidth_nm = 3.0);

struct SourceModel {
  double pair_rate_hz = 9000.0;        // prepared states entering the probe
  double indistinguishability = 1.0;   // x ceiling at zero delay
  std::optional<double> delay_fs;      // when set, x follows the Gaussian model
  double coherence_sigma_fs = transform_limited_sigma_fs();
  bool heralded = false;               // N=1 runs herald on the partner photon

  /// x(tau) = ceiling * exp(-tau^2 / (2 sigma^2))
  double x_at_delay(double tau_fs) const;
  /// Resolves delay_fs if present, otherwise the ceiling itself.
  double effective_x() const;
};

struct LossModel {
  double channel_eta = 1.0;       // per-path system efficiency
  double detector_eta1 = 1.0;
  double detector_eta2 = 1.0;
  double coincidence_window_ns = 1.0;
  double dark_rate_hz = 0.0;

  /// N=1: channel * det1 * det2 (signal chain and herald chain);
  /// N=2: channel^2 * det1 * det2.
  double eta_total(int n_photons) const;
};

/// Measured l = 1 efficiencies: 2.6 % heralded channel, 2.01 % pair average,
/// SPAD efficiencies 75 % and 74 %.
LossModel reference_loss_single();
LossModel reference_loss_pair();

enum class ProjectionScheme { Orthogonal, Identical };

struct ScanConfig {
  int n_photons = 2;
  int ell = 1;
  ProjectionScheme scheme = ProjectionScheme::Orthogonal;
  double integration_time_s = 3.0;
  int repetitions = 25;
  bool subtract_accidentals = true;
};

/// Axis-indexed repetition counts for one configuration. The axis is the
/// rotation angle in degrees for rotation scans and the delay in fs for
/// HOM scans; it must be strictly increasing.
struct ScanDataset {
  ScanConfig config;
  std::string axis_label = "angle_deg";
  std::vector<double> axis;
  std::vector<std::vector<double>> counts;  // [axis index][repetition]
  bool accidentals_subtracted = false;

  double mean(std::size_t i) const;
  double sample_variance(std::size_t i) const;  // ddof = 1; 0 if < 2 reps
  void validate() const;
};

/// Coincidence (or heralded-detection) probability per prepared N00N state,
/// including the measurement's probabilistic splitting and projections.
/// phi in radians; x is the photon-pair indistinguishability. Evaluated in
/// Fock space via lifted mode unitaries, not by formula substitution.
double coincidence_probability(int n_photons, int ell, double phi,
                               ProjectionScheme scheme, double x);

/// Full apparatus scan: per angle, expected rate = eta_total * pair_rate *
/// coincidence_probability; counts drawn Poisson per repetition; accidentals
/// (singles1 * singles2 * window) added and optionally subtracted as a known
/// mean. Bit-reproducible for a fixed seed.
ScanDataset simulate_scan(const ScanConfig& config,
                          const std::vector<double>& angles_deg,
                          const LossModel& loss, const SourceModel& source,
                          std::uint64_t seed);

/// Idealized scan of the theory model: per angle and repetition, counts ~
/// Binomial(trials, |<psi_0|psi_phi>|^2) with the projection evaluated in
/// Fock space. This is the fixed-trials measurement the closed-form
/// expectation/variance/uncertainty curves describe.
ScanDataset simulate_projection_scan(int n_photons, int ell, int trials_per_rep,
                                     int repetitions,
                                     const std::vector<double>& angles_deg,
                                     std::uint64_t seed);

struct HomParams {
  double integration_time_s = 1.0;
  int repetitions = 50;
  bool subtract_accidentals = true;
};

/// Hong-Ou-Mandel delay scan with the photons projected onto the orthogonal
/// OAM states +l and -l; coincidences vanish at zero delay for x -> 1.
ScanDataset hom_scan(const std::vector<double>& delays_fs,
                     const SourceModel& source, const LossModel& loss,
                     const HomParams& params, std::uint64_t seed);

enum class WitnessState {
  IdealNoon,        // bunched two-photon N00N state
  SeparableProduct, // distinguishable photons in +l and -l
  DephasedMixture,  // (|2,0><2,0| + |0,2><0,2|)/2
};

struct WitnessResult {
  double w = 0.0;
  /// Correlation visibilities in the OAM, petal and circular MUBs.
  std::array<double, 3> basis_visibility{};
};

/// Two-photon correlation witness: sum over the three single-photon MUBs of
/// |C11 + C22 - C12 - C21| / (C11 + C22 + C12 + C21). Ideal N00N -> 3,
/// separable bound 1. trials_per_setting > 0 draws Poissonian counts per
/// projector pair; 0 evaluates the exact probabilities.
WitnessResult witness_scan(WitnessState state, int ell, long trials_per_setting,
                           std::uint64_t seed);

}  // namespace noon::sim
