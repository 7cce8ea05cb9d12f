#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "noon/fock.hpp"
#include "noon/io.hpp"
#include "noon/rng.hpp"

using namespace noon;
using fock::cplx;
using fock::ModeUnitary;
using fock::TwoModeFockState;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

ModeUnitary random_unitary(std::mt19937_64& eng) {
  std::normal_distribution<double> g;
  Eigen::Matrix2cd m;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) m(r, c) = cplx(g(eng), g(eng));
  }
  return Eigen::HouseholderQR<Eigen::Matrix2cd>(m).householderQ();
}

TwoModeFockState random_state(int n_photons, int ell, std::mt19937_64& eng) {
  std::normal_distribution<double> g;
  std::vector<cplx> amps(n_photons + 1);
  for (auto& a : amps) a = cplx(g(eng), g(eng));
  return TwoModeFockState::normalized(ell, std::move(amps));
}

// Independent oracle for the lift: substitute the creation operators and
// expand the polynomial one linear factor at a time (plain convolution),
// then read monomial coefficients back into Fock amplitudes.
std::vector<cplx> lift_oracle(const ModeUnitary& u, const TwoModeFockState& s) {
  const int N = s.n_photons();
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  std::vector<cplx> out(N + 1, cplx(0.0, 0.0));
  for (int n = 0; n <= N; ++n) {
    if (s.amplitude(n) == cplx(0.0, 0.0)) continue;
    // poly[p] = coefficient of a1^p a2^(deg - p)
    std::vector<cplx> poly{1.0};
    auto mul_linear = [&](cplx cx, cplx cy) {
      std::vector<cplx> next(poly.size() + 1, cplx(0.0, 0.0));
      for (std::size_t p = 0; p < poly.size(); ++p) {
        next[p + 1] += poly[p] * cx;
        next[p] += poly[p] * cy;
      }
      poly = std::move(next);
    };
    for (int i = 0; i < n; ++i) mul_linear(u(0, 0), u(1, 0));
    for (int i = 0; i < N - n; ++i) mul_linear(u(0, 1), u(1, 1));
    const cplx scale = s.amplitude(n) / std::sqrt(fact(n) * fact(N - n));
    for (int p = 0; p <= N; ++p) {
      out[p] += scale * poly[p] * std::sqrt(fact(p) * fact(N - p));
    }
  }
  return out;
}

double max_amp_diff(const TwoModeFockState& a, const TwoModeFockState& b) {
  double m = 0.0;
  for (int n = 0; n <= a.n_photons(); ++n) {
    m = std::max(m, std::abs(a.amplitude(n) - b.amplitude(n)));
  }
  return m;
}

// modulus-wise distance up to a global phase, aligned on the largest amplitude
double diff_up_to_global_phase(const TwoModeFockState& a, const TwoModeFockState& b) {
  const cplx ov = fock::inner_product(a, b);
  const cplx phase = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1.0, 0.0);
  double m = 0.0;
  for (int n = 0; n <= a.n_photons(); ++n) {
    m = std::max(m, std::abs(phase * a.amplitude(n) - b.amplitude(n)));
  }
  return m;
}

}  // namespace

TEST_CASE("make_noon basis amplitudes") {
  const auto s = fock::make_noon(2, 1, 0.0);
  CHECK(std::abs(s.amplitude(0) - cplx(-kInvSqrt2, 0.0)) < 1e-15);
  CHECK(std::abs(s.amplitude(1)) < 1e-15);
  CHECK(std::abs(s.amplitude(2) - cplx(kInvSqrt2, 0.0)) < 1e-15);

  const auto s1 = fock::make_noon(1, 5, 0.0);
  CHECK(std::abs(s1.amplitude(1) - cplx(kInvSqrt2, 0.0)) < 1e-15);
  CHECK(std::abs(s1.amplitude(0) - cplx(-kInvSqrt2, 0.0)) < 1e-15);

  // e^{-2i*2*10*pi/40} = e^{-i pi} = -1 flips the |0,N> sign
  const auto s2 = fock::make_noon(2, 10, kPi / 40.0);
  CHECK(std::abs(s2.amplitude(0) - cplx(kInvSqrt2, 0.0)) < 1e-12);
  CHECK(std::abs(s2.amplitude(2) - cplx(kInvSqrt2, 0.0)) < 1e-12);
}

TEST_CASE("make_noon rejects invalid parameters") {
  CHECK_THROWS_AS(fock::make_noon(2, 0, 0.0), std::domain_error);
  CHECK_THROWS_AS(fock::make_noon(0, 1, 0.0), std::domain_error);
  CHECK_THROWS_AS(fock::make_noon(fock::kMaxPhotons + 1, 1, 0.0), std::domain_error);
}

TEST_CASE("rotation_unitary evaluates the mode phases") {
  CHECK((fock::rotation_unitary(1, 0.0) - ModeUnitary::Identity()).norm() < 1e-15);

  const auto u_pi = fock::rotation_unitary(1, kPi);
  CHECK(std::abs(u_pi(0, 0) - cplx(-1.0, 0.0)) < 1e-12);
  CHECK(std::abs(u_pi(1, 1) - cplx(-1.0, 0.0)) < 1e-12);

  const auto u = fock::rotation_unitary(100, kPi / 200.0);
  CHECK(std::abs(u(0, 0) - cplx(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(u(1, 1) - cplx(0.0, -1.0)) < 1e-12);
  CHECK(fock::is_unitary(u));
}

TEST_CASE("hadamard_mub squares to identity and bunches |1,1>") {
  const auto h = fock::hadamard_mub();
  CHECK(((h * h) - ModeUnitary::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  const auto bunched = fock::lift_and_apply(h, TwoModeFockState::basis(2, 1, 1));
  CHECK(std::abs(bunched.amplitude(2) - cplx(kInvSqrt2, 0.0)) < 1e-12);
  CHECK(std::abs(bunched.amplitude(0) - cplx(-kInvSqrt2, 0.0)) < 1e-12);
  CHECK(std::abs(bunched.amplitude(1)) < 1e-12);

  const auto split = fock::lift_and_apply(h, TwoModeFockState::basis(1, 1, 1));
  CHECK(std::abs(split.amplitude(1) - cplx(kInvSqrt2, 0.0)) < 1e-12);
  CHECK(std::abs(split.amplitude(0) - cplx(kInvSqrt2, 0.0)) < 1e-12);
}

TEST_CASE("lift_and_apply matches the polynomial-expansion oracle") {
  auto eng = rng::engine(11, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(eng() % 3);
    const auto u = random_unitary(eng);
    const auto s = random_state(n, 2, eng);
    const auto lifted = fock::lift_and_apply(u, s);
    const auto expected = lift_oracle(u, s);
    for (int p = 0; p <= n; ++p) {
      CHECK(std::abs(lifted.amplitude(p) - expected[p]) < 1e-12);
    }
  }
}

TEST_CASE("lift_and_apply leaves states unchanged under identity") {
  auto eng = rng::engine(12, 0);
  const auto s = random_state(3, 1, eng);
  CHECK(max_amp_diff(fock::lift_and_apply(ModeUnitary::Identity(), s), s) < 1e-15);
}

TEST_CASE("lift_and_apply rejects non-unitary transforms") {
  ModeUnitary u = fock::hadamard_mub() * 1.001;
  CHECK_THROWS_AS(fock::lift_and_apply(u, fock::make_noon(2, 1, 0.0)),
                  std::domain_error);
}

TEST_CASE("lift preserves the norm for every photon number") {
  auto eng = rng::engine(13, 0);
  for (int n = 1; n <= fock::kMaxPhotons; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto u = random_unitary(eng);
      const auto s = random_state(n, 1, eng);
      CHECK(std::abs(fock::lift_and_apply(u, s).norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("lift composes: lift(u v) = lift(u) lift(v)") {
  auto eng = rng::engine(14, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(eng() % 3);
    const auto u = random_unitary(eng);
    const auto v = random_unitary(eng);
    const auto s = random_state(n, 1, eng);
    const auto once = fock::lift_and_apply(ModeUnitary(u * v), s);
    const auto twice = fock::lift_and_apply(u, fock::lift_and_apply(v, s));
    CHECK(max_amp_diff(once, twice) < 1e-10);
  }
}

TEST_CASE("projection_probability basics") {
  const auto s = fock::make_noon(2, 1, 0.0);
  CHECK(fock::projection_probability(s, s) == doctest::Approx(1.0).epsilon(1e-12));

  const auto psi0 =
      TwoModeFockState(1, {cplx(kInvSqrt2, 0), cplx(0, 0), cplx(kInvSqrt2, 0)});
  CHECK(fock::projection_probability(s, psi0) < 1e-15);
  CHECK(fock::projection_probability(fock::make_noon(2, 1, kPi / 4.0), psi0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(
      fock::projection_probability(s, fock::make_noon(1, 1, 0.0)),
      std::domain_error);
  CHECK_THROWS_AS(
      fock::projection_probability(s, fock::make_noon(2, 2, 0.0)),
      std::domain_error);
}

TEST_CASE("projection fringe equals the closed-form expectation") {
  // p(phi) = (1 - cos 2 N l phi)/2 on a degree grid
  for (int n : {1, 2}) {
    for (int ell : {1, 3, 10, 50}) {
      std::vector<cplx> amps(n + 1, cplx(0.0, 0.0));
      amps.front() = kInvSqrt2;
      amps.back() = kInvSqrt2;
      const TwoModeFockState psi0(ell, amps);
      for (int i = 0; i <= 180; ++i) {
        const double phi = i * 2.0 * kPi / 180.0;
        const double p =
            fock::projection_probability(fock::make_noon(n, ell, phi), psi0);
        const double expected = 0.5 * (1.0 - std::cos(2.0 * n * ell * phi));
        CHECK(std::abs(p - expected) < 1e-10);
      }
    }
  }
}

TEST_CASE("rotating the unrotated state reproduces make_noon up to global phase") {
  for (int n : {1, 2, 3}) {
    for (int ell : {1, -2, 10}) {
      for (double phi : {0.0, 0.3, kPi / 7.0, 2.0}) {
        const auto rotated = fock::lift_and_apply(fock::rotation_unitary(ell, phi),
                                                  fock::make_noon(n, ell, 0.0));
        CHECK(diff_up_to_global_phase(rotated, fock::make_noon(n, ell, phi)) < 1e-12);
      }
    }
  }
}

TEST_CASE("analytic_prediction curves and uncertainty") {
  const auto p = fock::analytic_prediction(1, 2, 1);
  CHECK(p.expectation(kPi / 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.variance(0.0) == doctest::Approx(0.0));

  const auto q = fock::analytic_prediction(100, 2, 100);
  CHECK(q.delta_phi == doctest::Approx(2.5e-4).epsilon(1e-12));

  // bounds over a phase sweep
  const auto r = fock::analytic_prediction(40, 2, 3);
  for (int i = 0; i < 500; ++i) {
    const double phi = i * 0.013;
    CHECK(r.expectation(phi) >= 0.0);
    CHECK(r.expectation(phi) <= 40.0);
    CHECK(r.variance(phi) >= 0.0);
  }
  CHECK_THROWS_AS(fock::analytic_prediction(0, 2, 1), std::domain_error);
}

TEST_CASE("Bernoulli sampling converges to the variance formula") {
  const int m_trials = 100000;
  const int n = 2, ell = 3;
  std::vector<cplx> amps = {cplx(kInvSqrt2, 0), cplx(0, 0), cplx(kInvSqrt2, 0)};
  const TwoModeFockState psi0(ell, amps);
  auto eng = rng::engine(15, 0);
  for (double s2 : {0.12, 0.31, 0.77}) {  // sin^2(N l phi) targets, off-center
    const double phi = std::asin(std::sqrt(s2)) / (n * ell);
    const double p = fock::projection_probability(fock::make_noon(n, ell, phi), psi0);
    std::bernoulli_distribution coin(p);
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < m_trials; ++t) {
      const double v = coin(eng) ? 1.0 : 0.0;
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / m_trials;
    const double var_x = (sumsq - m_trials * mean * mean) / (m_trials - 1);
    const double mc_variance = m_trials * var_x;

    const auto pred = fock::analytic_prediction(m_trials, n, ell);
    const double expected = pred.variance(phi);
    // exact Bernoulli moments for the standard error of the variance estimate
    const double q = 1.0 - p;
    const double mu4 = p * q * (1.0 - 3.0 * p * q);
    const double se = m_trials * std::sqrt(std::abs(mu4 - p * p * q * q) / m_trials);
    CHECK(std::abs(mc_variance - expected) <= 5.0 * se);
    CHECK(std::abs(mean * m_trials - pred.expectation(phi)) <=
          5.0 * std::sqrt(m_trials * p * q));
  }
}

TEST_CASE("state JSON fixtures round-trip") {
  auto eng = rng::engine(16, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(eng() % fock::kMaxPhotons);
    const auto s = random_state(n, 7, eng);
    const auto back = io::state_from_json(io::state_to_json(s));
    CHECK(back.ell() == s.ell());
    CHECK(max_amp_diff(back, s) < 1e-15);
  }
}
