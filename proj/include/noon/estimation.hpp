#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "noon/experiment.hpp"

// Analysis chain: weighted nonlinear least-squares fringe fitting, visibility
// with standard errors, loss-aware Fisher information, Cramer-Rao comparison,
// per-angle angular uncertainty, and normalized sensitivity scaling.
//
// Angles at this interface are degrees throughout (the fit model and the
// uncertainty formula carry the pi/180 factor explicitly), so Fisher
// information is per squared degree and uncertainties are degrees.

namespace noon::est {

/// Thrown when a fit fails to converge or detects period aliasing.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parameters of the fringe model (A/2)(1 - cos(2Nl (pi/180) phi - c)) + D.
struct FringeFit {
  double amplitude = 0.0;     // A, counts
  double phase_offset = 0.0;  // c, radians
  double offset = 0.0;        // D, counts (bounded >= 0)
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // order (A, c, D)
  double visibility = 0.0;    // A/(A + 2D)
  double visibility_se = 0.0;
  int n_photons = 0;
  int ell = 0;
  double fitted_period_deg = 0.0;  // free-period diagnostic refit
  double weighted_rss = 0.0;
  double gradient_norm = 0.0;  // weighted-residual gradient at the optimum
  int iterations = 0;

  double period_deg() const;          // 180 / (N |l|), the fixed prior
  double eval(double angle_deg) const;
  /// Model mean with the spec's variance floor applied: max(1, model).
  double poisson_variance(double angle_deg) const;
};

/// Weighted fit of the fringe model to per-angle repetition counts. Weights
/// are the reciprocal measured variance (floored at max(1, mean)); the
/// period is fixed by the (N, l) prior and c is multi-started on a coarse
/// grid. Throws FitError on non-convergence or when the free-period
/// diagnostic deviates more than 30 % from the prior (aliasing).
FringeFit fit_fringe(const sim::ScanDataset& data, int n_photons, int ell);

struct FisherPoint {
  double phi_deg = 0.0;
  double fisher = 0.0;   // per-trial information, 1/deg^2
  bool excluded = false; // P1 pinned at 0 or 1: formula singular
};

struct FisherCurve {
  std::vector<FisherPoint> points;
  double m_total = 0.0;  // (A + D)/eta, trials per repetition before losses
  double eta = 0.0;
  int n_photons = 0;
  int ell = 0;
  double phase_offset = 0.0;  // c of the generating fit, radians
};

/// Two-outcome Fisher information from the fitted fringe, with detection
/// probability P1 = eta/(A+D) * model and P2 = 1 - P1.
FisherCurve fisher_information(const FringeFit& fit, const sim::LossModel& loss,
                               int n_photons, int ell,
                               const std::vector<double>& phi_grid_deg);

struct UncertaintyPoint {
  double phi_deg = 0.0;
  double delta_phi_deg = 0.0;            // from the measured std deviation
  double predicted_delta_phi_deg = 0.0;  // Poisson errors from the fit
  bool usable = false;  // false at fringe extrema (|sin| < 1e-3) or without spread
};

/// Per-angle angular uncertainty
/// delta_phi = dM(phi) / (A Nl (pi/180) |sin(2Nl (pi/180) phi - c)|).
std::vector<UncertaintyPoint> angular_uncertainty(const sim::ScanDataset& data,
                                                  const FringeFit& fit,
                                                  int n_photons, int ell);

struct CrbPoint {
  double phi_deg = 0.0;
  double inv_variance = 0.0;  // 1/delta_phi^2
  double mt_fisher = 0.0;     // M_T * F
  double ratio = 0.0;         // inv_variance / mt_fisher
  bool midband = false;       // |sin| >= 0.9: near a fringe half-point
};

struct CrbReport {
  std::vector<CrbPoint> points;
  double tolerance = 0.1;
  double fraction_within = 0.0;      // ratio <= 1 + tolerance
  double median_ratio_midband = 0.0;
};

/// Compare reciprocal measured variance against M_T * F on the overlapping
/// grid; flagged extremum points are excluded. Throws on empty overlap.
CrbReport crb_check(const FisherCurve& fisher,
                    const std::vector<UncertaintyPoint>& uncertainties,
                    double tolerance = 0.1);

struct SensitivityPoint {
  int n_photons = 0;
  int ell = 0;
  double phi_at_best_deg = 0.0;
  double delta_phi_deg = 0.0;
  double normalized_sensitivity = 0.0;  // 1/deg, after dividing by sqrt(A+D)/A
};

struct FittedRun {
  sim::ScanDataset data;
  FringeFit fit;
};

struct SensitivityTable {
  std::vector<SensitivityPoint> points;  // up to 4 per run
  std::vector<std::string> warnings;     // runs with fewer than 4 usable points
};

/// The four usable points per run with the smallest fit-predicted
/// uncertainty (closest to maximum Fisher information), normalized by
/// sqrt(A+D)/A to remove the count-rate dependence.
SensitivityTable sensitivity_table(const std::vector<FittedRun>& runs);

/// Best achievable normalized sensitivity (1/deg) of the fringe model with
/// Poissonian errors at the given visibility; the Fig.-4-style theory curve.
double theory_normalized_sensitivity(int n_photons, int ell,
                                     double visibility = 0.9999);

struct ScalingReport {
  std::map<int, double> slope;         // per N: d log(sens) / d log(l)
  std::map<int, double> slope_stderr;
  double ratio_n2_over_n1 = 0.0;       // mean over common l
};

ScalingReport scaling_report(const std::vector<SensitivityPoint>& points);

/// Gaussian dip model B (1 - V exp(-(delay - center)^2 / (2 sigma^2))).
struct DipFit {
  double baseline = 0.0;   // B, counts
  double visibility = 0.0; // V
  double center_fs = 0.0;
  double sigma_fs = 0.0;
  double visibility_se = 0.0;
  double weighted_rss = 0.0;
};

/// Weighted fit of the dip model to a delay scan (axis in fs).
DipFit fit_hom_dip(const sim::ScanDataset& data);

}  // namespace noon::est
