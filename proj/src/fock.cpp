#include "noon/fock.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace noon::fock {

namespace {

constexpr std::array<double, kMaxPhotons + 1> kFactorial = {
    1, 1, 2, 6, 24, 120, 720, 5040, 40320};

double sqrt_factorial(int n) { return std::sqrt(kFactorial[n]); }

double binomial(int n, int k) {
  return kFactorial[n] / (kFactorial[k] * kFactorial[n - k]);
}

void check_photon_number(int n_photons) {
  if (n_photons < 1) {
    throw std::domain_error("photon number must be at least 1");
  }
  if (n_photons > kMaxPhotons) {
    throw std::domain_error("photon number " + std::to_string(n_photons) +
                            " exceeds the lift-table cap of " +
                            std::to_string(kMaxPhotons));
  }
}

void check_ell(int ell) {
  if (ell == 0) {
    throw std::domain_error("ell = 0 is not a valid OAM mode pair");
  }
}

}  // namespace

void validate(const ModeLabel& label) { check_ell(label.ell); }

TwoModeFockState::TwoModeFockState(int ell, std::vector<cplx> amplitudes)
    : ell_(ell), amps_(std::move(amplitudes)) {
  check_ell(ell_);
  check_photon_number(static_cast<int>(amps_.size()) - 1);
  double n = norm();
  if (std::abs(n - 1.0) > kRejectTol) {
    throw std::domain_error("state norm " + std::to_string(n) +
                            " is not 1 within tolerance");
  }
}

TwoModeFockState TwoModeFockState::normalized(int ell, std::vector<cplx> amplitudes) {
  double n2 = 0.0;
  for (const cplx& a : amplitudes) n2 += std::norm(a);
  if (n2 <= 0.0) throw std::domain_error("cannot normalize a zero state");
  const double inv = 1.0 / std::sqrt(n2);
  for (cplx& a : amplitudes) a *= inv;
  return TwoModeFockState(ell, std::move(amplitudes));
}

TwoModeFockState TwoModeFockState::basis(int n_photons, int n_plus, int ell) {
  check_photon_number(n_photons);
  if (n_plus < 0 || n_plus > n_photons) {
    throw std::domain_error("basis occupation outside [0, N]");
  }
  std::vector<cplx> amps(n_photons + 1, cplx(0.0, 0.0));
  amps[n_plus] = 1.0;
  return TwoModeFockState(ell, std::move(amps));
}

double TwoModeFockState::norm() const {
  double n2 = 0.0;
  for (const cplx& a : amps_) n2 += std::norm(a);
  return std::sqrt(n2);
}

cplx inner_product(const TwoModeFockState& bra, const TwoModeFockState& ket) {
  if (bra.n_photons() != ket.n_photons()) {
    throw std::domain_error("photon numbers differ in inner product");
  }
  if (bra.ell() != ket.ell()) {
    throw std::domain_error("OAM bases differ in inner product");
  }
  cplx acc(0.0, 0.0);
  for (int n = 0; n <= bra.n_photons(); ++n) {
    acc += std::conj(bra.amplitude(n)) * ket.amplitude(n);
  }
  return acc;
}

TwoModeFockState make_noon(int n_photons, int ell, double phi) {
  check_photon_number(n_photons);
  check_ell(ell);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<cplx> amps(n_photons + 1, cplx(0.0, 0.0));
  amps[n_photons] = inv_sqrt2;
  amps[0] = -std::exp(cplx(0.0, -2.0 * n_photons * ell * phi)) * inv_sqrt2;
  return TwoModeFockState(ell, std::move(amps));
}

ModeUnitary rotation_unitary(int ell, double phi) {
  check_ell(ell);
  ModeUnitary u = ModeUnitary::Zero();
  u(0, 0) = std::exp(cplx(0.0, ell * phi));
  u(1, 1) = std::exp(cplx(0.0, -ell * phi));
  return u;
}

ModeUnitary hadamard_mub() {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  ModeUnitary u;
  u << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
  return u;
}

bool is_unitary(const ModeUnitary& u, double tol) {
  return ((u.adjoint() * u) - ModeUnitary::Identity()).cwiseAbs().maxCoeff() <= tol;
}

TwoModeFockState lift_and_apply(const ModeUnitary& u, const TwoModeFockState& state) {
  if (!is_unitary(u)) {
    throw std::domain_error("mode transform is not unitary within tolerance");
  }
  const int N = state.n_photons();
  std::vector<cplx> out(N + 1, cplx(0.0, 0.0));

  // Powers of the four entries up to N, computed once.
  std::array<std::array<cplx, kMaxPhotons + 1>, 4> pw;
  const std::array<cplx, 4> entries = {u(0, 0), u(1, 0), u(0, 1), u(1, 1)};
  for (int e = 0; e < 4; ++e) {
    pw[e][0] = 1.0;
    for (int k = 1; k <= N; ++k) pw[e][k] = pw[e][k - 1] * entries[e];
  }

  for (int n = 0; n <= N; ++n) {
    const cplx alpha = state.amplitude(n);
    if (alpha == cplx(0.0, 0.0)) continue;
    const int m = N - n;
    const cplx scaled = alpha / (sqrt_factorial(n) * sqrt_factorial(m));
    // (u11 a1 + u21 a2)^n (u12 a1 + u22 a2)^m expanded binomially; the
    // monomial a1^p a2^(N-p) |0> carries sqrt(p!(N-p)!).
    for (int j = 0; j <= n; ++j) {
      const cplx cj = binomial(n, j) * pw[0][j] * pw[1][n - j];
      for (int k = 0; k <= m; ++k) {
        const int p = j + k;
        const cplx ck = binomial(m, k) * pw[2][k] * pw[3][m - k];
        out[p] += scaled * cj * ck * sqrt_factorial(p) * sqrt_factorial(N - p);
      }
    }
  }
  return TwoModeFockState(state.ell(), std::move(out));
}

double projection_probability(const TwoModeFockState& state,
                              const TwoModeFockState& target) {
  return std::norm(inner_product(target, state));
}

double AnalyticPrediction::expectation(double phi) const {
  return 0.5 * m_repetitions * (1.0 - std::cos(2.0 * n_photons * ell * phi));
}

double AnalyticPrediction::variance(double phi) const {
  const double s2 = std::pow(std::sin(n_photons * ell * phi), 2);
  return m_repetitions * s2 * (1.0 - s2);
}

AnalyticPrediction analytic_prediction(int m_repetitions, int n_photons, int ell) {
  if (m_repetitions < 1) throw std::domain_error("repetitions must be >= 1");
  check_photon_number(n_photons);
  check_ell(ell);
  AnalyticPrediction p;
  p.m_repetitions = m_repetitions;
  p.n_photons = n_photons;
  p.ell = ell;
  p.delta_phi = 1.0 / (2.0 * std::sqrt(double(m_repetitions)) * n_photons *
                       std::abs(ell));
  return p;
}

}  // namespace noon::fock
