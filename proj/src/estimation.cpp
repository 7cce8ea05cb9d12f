#include "noon/estimation.hpp"

#include <algorithm>\n#include <cstdio>\n#include <cstdlib>
#include <cmath>
#include <limits>
#include <numbers>

namespace noon::est {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
constexpr double kSinFloor = 1e-3;   // Eq.-(3) extremum guard
constexpr double kMidbandSin = 0.9;  // "near fringe midpoints" band

double fringe_k(int n_photons, int ell) { return 2.0 * n_photons * std::abs(ell) * kDeg; }

template <int NP>
struct LmResult {
  Eigen::Matrix<double, NP, 1> params;
  Eigen::Matrix<double, NP, NP> covariance;
  double wrss = std::numeric_limits<double>::infinity();
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped Gauss-Newton with projected box bounds. model(p, x) returns the
// model value, jacobian(p, x) its gradient wrt the parameters.
template <int NP, class ModelFn, class JacFn>
LmResult<NP> levenberg(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<double>& w,
                       Eigen::Matrix<double, NP, 1> p,
                       const Eigen::Matrix<double, NP, 1>& lo,
                       const Eigen::Matrix<double, NP, 1>& hi, ModelFn model,
                       JacFn jacobian, int max_iter = 400) {
  using Vec = Eigen::Matrix<double, NP, 1>;
  using Mat = Eigen::Matrix<double, NP, NP>;

  const auto clamp = [&](Vec v) {
    for (int i = 0; i < NP; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    return v;
  };
  const auto wrss_at = [&](const Vec& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - model(q, x[i]);
      acc += w[i] * r * r;
    }
    return acc;
  };
  // gradient with components pointing into an active bound zeroed out
  // (the KKT optimality measure for a box-constrained fit)
  const auto project = [&](Vec g, const Vec& q) {
    for (int i = 0; i < NP; ++i) {
      if ((q[i] <= lo[i] && g[i] < 0.0) || (q[i] >= hi[i] && g[i] > 0.0)) {
        g[i] = 0.0;
      }
    }
    return g;
  };

  p = clamp(p);
  LmResult<NP> out;
  out.params = p;
  out.wrss = wrss_at(p);

  double lambda = 1e-6;
  for (int it = 0; it < max_iter; ++it) {
    Mat h = Mat::Zero();
    Vec g = Vec::Zero();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Vec j = jacobian(p, x[i]);
      const double r = y[i] - model(p, x[i]);
      h += w[i] * j * j.transpose();
      g += w[i] * r * j;
    }
    out.gradient_norm = g.norm();
    out.iterations = it;

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Mat damped = h;
      for (int d = 0; d < NP; ++d) {
        damped(d, d) += lambda * std::max(h(d, d), 1e-12);
      }
      const Vec step = damped.ldlt().solve(g);
      const Vec cand = clamp(p + step);
      const double cand_wrss = wrss_at(cand);
      if (cand_wrss <= out.wrss * (1.0 + 1e-15)) {
        const double step_size = (cand - p).cwiseAbs().maxCoeff();
        const double scale = p.cwiseAbs().maxCoeff() + 1.0;
        p = cand;
        const bool improved = cand_wrss < out.wrss;
        out.wrss = cand_wrss;
        out.params = p;
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        if (step_size < 1e-12 * scale || (!improved && step_size < 1e-9 * scale)) {
          out.converged = true;
        }
      } else {
        lambda *= 8.0;
      }
    }
    if (!accepted || out.converged) {
      out.converged = out.converged || accepted;
      break;
    }
  }

  // undamped Newton polish: near the optimum the wrss change sits below the
  // floating-point resolution of wrss itself, so accept steps that are
  // neutral at noise level and let the quadratic contraction collapse the
  // gradient instead
  Mat h = Mat::Zero();
  Vec g = Vec::Zero();
  const double wrss_eps = 1e-12 * (1.0 + out.wrss);
  for (int polish = 0; polish < 10; ++polish) {
    h.setZero();
    g.setZero();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Vec j = jacobian(p, x[i]);
      const double r = y[i] - model(p, x[i]);
      h += w[i] * j * j.transpose();
      g += w[i] * r * j;
    }
    if (project(g, p).norm() <= 1e-12 * (1.0 + out.wrss)) break;
    if (std::getenv("NOON_DEBUG_POLISH")) {
      std::fprintf(stderr, "polish it %d: |g|=%.3e wrss=%.15g\n", polish,
                   project(g, p).norm(), out.wrss);
    }
    const Vec full_step = h.ldlt().solve(g);
    bool improved = false;
    double scale = 1.0;
    for (int halving = 0; halving < 8 && !improved; ++halving, scale *= 0.5) {
      const Vec cand = clamp(p + scale * full_step);
      const double cand_wrss = wrss_at(cand);
      if (cand_wrss <= out.wrss + wrss_eps) {
        p = cand;
        out.wrss = std::min(out.wrss, cand_wrss);
        out.params = p;
        improved = true;
      }
    }
    if (!improved) break;
  }

  h.setZero();
  g.setZero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vec j = jacobian(p, x[i]);
    const double r = y[i] - model(p, x[i]);
    h += w[i] * j * j.transpose();
    g += w[i] * r * j;
  }
  out.gradient_norm = project(g, p).norm();
  Mat cov = h.ldlt().solve(Mat::Identity());
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

struct AngleStats {
  std::vector<double> angles;
  std::vector<double> means;
  std::vector<double> weights;  // reps / floored variance
};

AngleStats collect_stats(const sim::ScanDataset& data) {
  AngleStats s;
  s.angles = data.axis;
  s.means.resize(data.axis.size());
  s.weights.resize(data.axis.size());
  for (std::size_t i = 0; i < data.axis.size(); ++i) {
    const double m = data.mean(i);
    // reciprocal measured variance, floored so that all-equal repetitions
    // (or zero counts) do not produce infinite weights
    const double floored = std::max(data.sample_variance(i), std::max(1.0, m));
    s.means[i] = m;
    s.weights[i] = static_cast<double>(data.counts[i].size()) / floored;
  }
  return s;
}

}  // namespace

double FringeFit::period_deg() const {
  return 180.0 / (n_photons * std::abs(ell));
}

double FringeFit::eval(double angle_deg) const {
  const double y = fringe_k(n_photons, ell) * angle_deg - phase_offset;
  return 0.5 * amplitude * (1.0 - std::cos(y)) + offset;
}

double FringeFit::poisson_variance(double angle_deg) const {
  return std::max(1.0, eval(angle_deg));
}

FringeFit fit_fringe(const sim::ScanDataset& data, int n_photons, int ell) {
  data.validate();
  if (n_photons < 1 || ell == 0) {
    throw std::domain_error("fit requires N >= 1 and ell != 0");
  }
  const double period = 180.0 / (n_photons * std::abs(ell));
  if (data.axis.size() < 8) {
    throw std::domain_error("need at least 8 angles to fit the fringe");
  }
  if (data.axis.back() - data.axis.front() < period * (1.0 - 1e-9)) {
    throw std::domain_error("angle span must cover at least one full period");
  }

  const AngleStats stats = collect_stats(data);
  const double k = fringe_k(n_photons, ell);

  const auto model3 = [k](const Eigen::Vector3d& p, double phi) {
    return 0.5 * p[0] * (1.0 - std::cos(k * phi - p[1])) + p[2];
  };
  const auto jac3 = [k](const Eigen::Vector3d& p, double phi) {
    const double y = k * phi - p[1];
    return Eigen::Vector3d(0.5 * (1.0 - std::cos(y)), -0.5 * p[0] * std::sin(y), 1.0);
  };

  const double hi_mean = *std::max_element(stats.means.begin(), stats.means.end());
  const double lo_mean = *std::min_element(stats.means.begin(), stats.means.end());
  if (!(hi_mean > lo_mean)) {
    throw FitError("counts are flat across all angles; no fringe to fit");
  }
  const Eigen::Vector3d lo(1e-12, -std::numeric_limits<double>::infinity(), 0.0);
  const Eigen::Vector3d hi = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());

  LmResult<3> best;
  for (int start = 0; start < 8; ++start) {
    Eigen::Vector3d p0(std::max(hi_mean - lo_mean, 1e-6), start * kPi / 4.0,
                       std::max(lo_mean, 0.0));
    const auto res = levenberg<3>(stats.angles, stats.means, stats.weights, p0,
                                  lo, hi, model3, jac3);
    if (res.converged && res.wrss < best.wrss) best = res;
  }
  if (!best.converged) {
    throw FitError("fringe fit did not converge after 8 restarts; best weighted RSS " +
                   std::to_string(best.wrss));
  }

  FringeFit fit;
  fit.amplitude = best.params[0];
  fit.phase_offset = std::fmod(best.params[1], 2.0 * kPi);
  if (fit.phase_offset < 0.0) fit.phase_offset += 2.0 * kPi;
  fit.offset = best.params[2];
  fit.covariance = best.covariance;
  fit.n_photons = n_photons;
  fit.ell = ell;
  fit.weighted_rss = best.wrss;
  fit.gradient_norm = best.gradient_norm;
  fit.iterations = best.iterations;

  const double denom = fit.amplitude + 2.0 * fit.offset;
  fit.visibility = fit.amplitude / denom;
  // first-order propagation through v = A/(A + 2D)
  Eigen::Vector3d grad(2.0 * fit.offset / (denom * denom), 0.0,
                       -2.0 * fit.amplitude / (denom * denom));
  fit.visibility_se = std::sqrt(std::max(0.0, grad.dot(fit.covariance * grad)));

  // free-period diagnostic: refit with a period scale seeded at the prior
  const auto model4 = [k](const Eigen::Vector4d& p, double phi) {
    return 0.5 * p[0] * (1.0 - std::cos(p[3] * k * phi - p[1])) + p[2];
  };
  const auto jac4 = [k](const Eigen::Vector4d& p, double phi) {
    const double y = p[3] * k * phi - p[1];
    return Eigen::Vector4d(0.5 * (1.0 - std::cos(y)), -0.5 * p[0] * std::sin(y),
                           1.0, 0.5 * p[0] * std::sin(y) * k * phi);
  };
  // Frequency scale bounded to [0.5, 2]: wide enough to flag a 30 %
  // period deviation, narrow enough to stay below the angle grid's
  // Nyquist band where uniform sampling creates exact aliases.
  const Eigen::Vector4d lo4(1e-12, -std::numeric_limits<double>::infinity(), 0.0, 0.5);
  const Eigen::Vector4d hi4(std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity(), 2.0);
  LmResult<4> free_period;
  free_period.params.setOnes();
  for (double scale0 : {0.5, 0.7, 1.0, 1.4, 2.0}) {
    Eigen::Vector4d p4(fit.amplitude, best.params[1], fit.offset, scale0);
    const auto res = levenberg<4>(stats.angles, stats.means, stats.weights, p4,
                                  lo4, hi4, model4, jac4);
    if (!res.converged) continue;
    const bool tie = res.wrss < free_period.wrss * (1.0 + 1e-9) &&
                     std::abs(std::log(res.params[3])) <
                         std::abs(std::log(free_period.params[3]));
    if (res.wrss < free_period.wrss * (1.0 - 1e-9) ||
        (std::isfinite(free_period.wrss) && tie) ||
        !std::isfinite(free_period.wrss)) {
      free_period = res;
    }
  }
  fit.fitted_period_deg =
      free_period.converged ? period / free_period.params[3] : period;
  if (std::abs(fit.fitted_period_deg - period) > 0.30 * period) {
    throw FitError("period aliasing: free-period fit found " +
                   std::to_string(fit.fitted_period_deg) + " deg, prior is " +
                   std::to_string(period) + " deg");
  }
  return fit;
}

FisherCurve fisher_information(const FringeFit& fit, const sim::LossModel& loss,
                               int n_photons, int ell,
                               const std::vector<double>& phi_grid_deg) {
  const double eta = loss.eta_total(n_photons);
  const double a = fit.amplitude;
  const double d = fit.offset;
  const double k = fringe_k(n_photons, ell);
  const double dpdphi_scale = eta / (a + d) * a * n_photons * std::abs(ell) * kDeg;

  FisherCurve curve;
  curve.eta = eta;
  curve.m_total = (a + d) / eta;
  curve.n_photons = n_photons;
  curve.ell = ell;
  curve.phase_offset = fit.phase_offset;
  curve.points.reserve(phi_grid_deg.size());
  for (double phi : phi_grid_deg) {
    const double y = k * phi - fit.phase_offset;
    const double p1 = eta / (a + d) * (0.5 * a * (1.0 - std::cos(y)) + d);
    FisherPoint pt;
    pt.phi_deg = phi;
    if (p1 <= 1e-12 || p1 >= 1.0 - 1e-12) {
      pt.excluded = true;  // two-outcome information is singular here
    } else {
      const double dp1 = dpdphi_scale * std::sin(y);
      pt.fisher = dp1 * dp1 * (1.0 / p1 + 1.0 / (1.0 - p1));
    }
    curve.points.push_back(pt);
  }
  return curve;
}

std::vector<UncertaintyPoint> angular_uncertainty(const sim::ScanDataset& data,
                                                  const FringeFit& fit,
                                                  int n_photons, int ell) {
  const double k = fringe_k(n_photons, ell);
  const double denom_scale = fit.amplitude * n_photons * std::abs(ell) * kDeg;

  std::vector<UncertaintyPoint> out;
  out.reserve(data.axis.size());
  for (std::size_t i = 0; i < data.axis.size(); ++i) {
    UncertaintyPoint pt;
    pt.phi_deg = data.axis[i];
    const double abs_sin = std::abs(std::sin(k * pt.phi_deg - fit.phase_offset));
    const double sd = std::sqrt(data.sample_variance(i));
    if (abs_sin < kSinFloor) {
      pt.usable = false;  // singular denominator at the extremum
      pt.delta_phi_deg = std::numeric_limits<double>::quiet_NaN();
      pt.predicted_delta_phi_deg = std::numeric_limits<double>::quiet_NaN();
    } else {
      pt.predicted_delta_phi_deg =
          std::sqrt(fit.poisson_variance(pt.phi_deg)) / (denom_scale * abs_sin);
      if (sd > 0.0 && data.counts[i].size() >= 2) {
        pt.usable = true;
        pt.delta_phi_deg = sd / (denom_scale * abs_sin);
      } else {
        pt.usable = false;
        pt.delta_phi_deg = std::numeric_limits<double>::quiet_NaN();
      }
    }
    out.push_back(pt);
  }
  return out;
}

CrbReport crb_check(const FisherCurve& fisher,
                    const std::vector<UncertaintyPoint>& uncertainties,
                    double tolerance) {
  const double k = fringe_k(fisher.n_photons, fisher.ell);
  CrbReport report;
  report.tolerance = tolerance;

  std::vector<double> midband_ratios;
  int within = 0;
  for (const UncertaintyPoint& u : uncertainties) {
    if (!u.usable) continue;
    const auto match =
        std::find_if(fisher.points.begin(), fisher.points.end(), [&](const FisherPoint& f) {
          return std::abs(f.phi_deg - u.phi_deg) < 1e-9;
        });
    if (match == fisher.points.end() || match->excluded) continue;

    CrbPoint pt;
    pt.phi_deg = u.phi_deg;
    pt.inv_variance = 1.0 / (u.delta_phi_deg * u.delta_phi_deg);
    pt.mt_fisher = fisher.m_total * match->fisher;
    pt.ratio = pt.inv_variance / pt.mt_fisher;
    pt.midband = std::abs(std::sin(k * u.phi_deg - fisher.phase_offset)) >= kMidbandSin;
    if (pt.ratio <= 1.0 + tolerance) ++within;
    if (pt.midband) midband_ratios.push_back(pt.ratio);
    report.points.push_back(pt);
  }
  if (report.points.empty()) {
    throw std::domain_error("no overlap between Fisher grid and usable uncertainty points");
  }
  report.fraction_within = static_cast<double>(within) / report.points.size();
  if (!midband_ratios.empty()) {
    std::sort(midband_ratios.begin(), midband_ratios.end());
    const std::size_t n = midband_ratios.size();
    report.median_ratio_midband = (n % 2 == 1)
                                      ? midband_ratios[n / 2]
                                      : 0.5 * (midband_ratios[n / 2 - 1] + midband_ratios[n / 2]);
  }
  return report;
}

SensitivityTable sensitivity_table(const std::vector<FittedRun>& runs) {
  SensitivityTable table;
  for (const FittedRun& run : runs) {
    const auto points =
        angular_uncertainty(run.data, run.fit, run.fit.n_photons, run.fit.ell);
    std::vector<const UncertaintyPoint*> usable;
    for (const auto& p : points) {
      if (p.usable) usable.push_back(&p);
    }
    // the four points the fit predicts to be most informative
    std::sort(usable.begin(), usable.end(), [](const auto* a, const auto* b) {
      return a->predicted_delta_phi_deg < b->predicted_delta_phi_deg;
    });
    if (usable.size() < 4) {
      table.warnings.push_back("run N=" + std::to_string(run.fit.n_photons) +
                               " ell=" + std::to_string(run.fit.ell) + " has only " +
                               std::to_string(usable.size()) + " usable points");
    }
    const double norm_factor =
        std::sqrt(run.fit.amplitude + run.fit.offset) / run.fit.amplitude;
    const std::size_t take = std::min<std::size_t>(4, usable.size());
    for (std::size_t i = 0; i < take; ++i) {
      SensitivityPoint sp;
      sp.n_photons = run.fit.n_photons;
      sp.ell = run.fit.ell;
      sp.phi_at_best_deg = usable[i]->phi_deg;
      sp.delta_phi_deg = usable[i]->delta_phi_deg;
      sp.normalized_sensitivity = norm_factor / usable[i]->delta_phi_deg;
      table.points.push_back(sp);
    }
  }
  return table;
}

double theory_normalized_sensitivity(int n_photons, int ell, double visibility) {
  if (!(visibility > 0.0 && visibility <= 1.0)) {
    throw std::domain_error("visibility must lie in (0, 1]");
  }
  const double a = 1.0;
  const double d = 0.5 * a * (1.0 - visibility) / visibility;
  const double denom_scale = n_photons * std::abs(ell) * kDeg;
  double best = std::numeric_limits<double>::infinity();
  const int n_grid = 20000;
  for (int i = 1; i < n_grid; ++i) {
    const double y = kPi * i / n_grid;
    const double abs_sin = std::sin(y);
    if (abs_sin < 1e-9) continue;
    const double mu = 0.5 * a * (1.0 - std::cos(y)) + d;
    const double dphi_norm = std::sqrt(mu / (a + d)) / (denom_scale * abs_sin);
    best = std::min(best, dphi_norm);
  }
  return 1.0 / best;
}

DipFit fit_hom_dip(const sim::ScanDataset& data) {
  data.validate();
  if (data.axis.size() < 8) {
    throw std::domain_error("need at least 8 delay points to fit the dip");
  }
  const AngleStats stats = collect_stats(data);

  // p = (B, V, center, sigma)
  const auto model = [](const Eigen::Vector4d& p, double tau) {
    const double z = (tau - p[2]) / p[3];
    return p[0] * (1.0 - p[1] * std::exp(-0.5 * z * z));
  };
  const auto jac = [](const Eigen::Vector4d& p, double tau) {
    const double z = (tau - p[2]) / p[3];
    const double e = std::exp(-0.5 * z * z);
    return Eigen::Vector4d(1.0 - p[1] * e, -p[0] * e, -p[0] * p[1] * e * z / p[3],
                           -p[0] * p[1] * e * z * z / p[3]);
  };

  const double hi_mean = *std::max_element(stats.means.begin(), stats.means.end());
  const double lo_mean = *std::min_element(stats.means.begin(), stats.means.end());
  const double span = data.axis.back() - data.axis.front();
  const double v0 = hi_mean > 0.0 ? std::clamp(1.0 - lo_mean / hi_mean, 0.1, 1.0) : 0.5;
  const Eigen::Vector4d lo(1e-12, 0.0, data.axis.front(), span * 1e-3);
  const Eigen::Vector4d hi(std::numeric_limits<double>::infinity(), 2.0,
                           data.axis.back(), span * 10.0);

  LmResult<4> best;
  for (double sigma0 : {span / 16.0, span / 8.0, span / 4.0}) {
    const Eigen::Vector4d p0(std::max(hi_mean, 1.0), v0, 0.0, sigma0);
    const auto res =
        levenberg<4>(stats.angles, stats.means, stats.weights, p0, lo, hi, model, jac);
    if (res.converged && res.wrss < best.wrss) best = res;
  }
  if (!best.converged) {
    throw FitError("dip fit did not converge; best weighted RSS " +
                   std::to_string(best.wrss));
  }
  DipFit fit;
  fit.baseline = best.params[0];
  fit.visibility = best.params[1];
  fit.center_fs = best.params[2];
  fit.sigma_fs = best.params[3];
  fit.visibility_se = std::sqrt(std::max(0.0, best.covariance(1, 1)));
  fit.weighted_rss = best.wrss;
  return fit;
}

ScalingReport scaling_report(const std::vector<SensitivityPoint>& points) {
  ScalingReport report;
  std::map<int, std::vector<std::pair<double, double>>> by_n;  // (log l, log s)
  std::map<int, std::map<int, std::pair<double, int>>> mean_sens;  // N -> l -> (sum, n)
  for (const auto& p : points) {
    if (p.normalized_sensitivity <= 0.0) continue;
    by_n[p.n_photons].push_back(
        {std::log(double(std::abs(p.ell))), std::log(p.normalized_sensitivity)});
    auto& cell = mean_sens[p.n_photons][std::abs(p.ell)];
    cell.first += p.normalized_sensitivity;
    cell.second += 1;
  }
  for (const auto& [n, xy] : by_n) {
    const auto m = static_cast<double>(xy.size());
    if (xy.size() < 2) continue;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [lx, ly] : xy) {
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double denom = m * sxx - sx * sx;
    if (denom <= 0.0) continue;
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;
    double rss = 0.0;
    for (const auto& [lx, ly] : xy) {
      const double r = ly - slope * lx - intercept;
      rss += r * r;
    }
    report.slope[n] = slope;
    report.slope_stderr[n] =
        xy.size() > 2 ? std::sqrt(rss / (m - 2.0) * m / denom) : 0.0;
  }
  if (mean_sens.count(1) && mean_sens.count(2)) {
    double acc = 0.0;
    int n_common = 0;
    for (const auto& [l, cell1] : mean_sens[1]) {
      const auto it = mean_sens[2].find(l);
      if (it == mean_sens[2].end()) continue;
      const double s1 = cell1.first / cell1.second;
      const double s2 = it->second.first / it->second.second;
      acc += s2 / s1;
      ++n_common;
    }
    if (n_common > 0) report.ratio_n2_over_n1 = acc / n_common;
  }
  return report;
}

}  // namespace noon::est
