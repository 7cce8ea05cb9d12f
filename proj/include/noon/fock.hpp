#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

// Exact two-mode N-photon state algebra for twisted N00N interferometry:
// state construction, second-quantized lifting of 2x2 mode unitaries,
// projections, and the closed-form expectation/variance/uncertainty curves.

namespace noon::fock {

using cplx = std::complex<double>;

/// 2x2 complex transform acting on the single-photon mode pair {+l, -l}.
using ModeUnitary = Eigen::Matrix2cd;

/// Lift tables are precomputed up to this photon number.
inline constexpr int kMaxPhotons = 8;

/// Rejection threshold for unitarity / normalization checks.
inline constexpr double kRejectTol = 1e-9;

/// Assertion-level tolerance used by tests.
inline constexpr double kAssertTol = 1e-12;

/// Names a single-photon transverse mode of the {+l, -l} pair or its
/// petal (mutually unbiased) superpositions.
struct ModeLabel {
  enum class Kind { OamPlus, OamMinus, PetalM1, PetalM2 };
  Kind kind = Kind::OamPlus;
  int ell = 1;  // quanta of OAM in hbar units, never 0
};

/// Throws std::domain_error unless label.ell != 0.
void validate(const ModeLabel& label);

/// N photons distributed over the {+l, -l} mode pair.
///
/// amplitudes()[n] multiplies the Fock basis ket |n, N-n>, i.e. n photons in
/// the +l mode and N-n in the -l mode. States are validated to unit norm on
/// construction and every operation preserves the norm to better than 1e-12.
class TwoModeFockState {
 public:
  /// amplitudes.size() must be N+1 with N in [1, kMaxPhotons]; the vector
  /// must be normalized within kRejectTol.
  TwoModeFockState(int ell, std::vector<cplx> amplitudes);

  /// Same, but rescales the amplitudes to unit norm first.
  static TwoModeFockState normalized(int ell, std::vector<cplx> amplitudes);

  /// Basis ket |n_plus, N - n_plus>.
  static TwoModeFockState basis(int n_photons, int n_plus, int ell);

  int n_photons() const { return static_cast<int>(amps_.size()) - 1; }
  int ell() const { return ell_; }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  cplx amplitude(int n_plus) const { return amps_.at(n_plus); }
  double norm() const;

 private:
  int ell_;
  std::vector<cplx> amps_;
};

/// <bra|ket>; both states must share N and the l basis.
cplx inner_product(const TwoModeFockState& bra, const TwoModeFockState& ket);

/// Rotated N00N state (|N,0> - e^{-2iNl phi}|0,N>)/sqrt(2).
TwoModeFockState make_noon(int n_photons, int ell, double phi);

/// Physical rotation by phi as a mode transform: diag(e^{il phi}, e^{-il phi}).
ModeUnitary rotation_unitary(int ell, double phi);

/// Hadamard between the OAM basis and the petal basis {M1, M2}:
/// (1/sqrt 2) [[1, 1], [1, -1]]. Lifting it onto |1,1> bunches the photons.
ModeUnitary hadamard_mub();

bool is_unitary(const ModeUnitary& u, double tol = kRejectTol);

/// Second-quantized action of u on an N-photon state:
/// a†_1 -> u11 a†_1 + u21 a†_2, a†_2 -> u12 a†_1 + u22 a†_2, expanded
/// multinomially with exact factorial normalization. Rejects non-unitary u.
TwoModeFockState lift_and_apply(const ModeUnitary& u, const TwoModeFockState& state);

/// |<target|state>|^2.
double projection_probability(const TwoModeFockState& state,
                              const TwoModeFockState& target);

/// Closed-form curves for M independent copies projected onto
/// (|N,0>+|0,N>)/sqrt(2); phi in radians.
struct AnalyticPrediction {
  int m_repetitions = 1;
  int n_photons = 1;
  int ell = 1;
  double delta_phi = 0.0;  // 1/(2 sqrt(M) N |l|), radians

  double expectation(double phi) const;  // (M/2)(1 - cos 2Nl phi)
  double variance(double phi) const;     // M sin^2(Nl phi)(1 - sin^2(Nl phi))
};

AnalyticPrediction analytic_prediction(int m_repetitions, int n_photons, int ell);

}  // namespace noon::fock
