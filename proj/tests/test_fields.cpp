#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "noon/fields.hpp"
#include "noon/fock.hpp"
#include "noon/io.hpp"

using namespace noon;
using fields::GridSpec;
using fields::Petal;
using fields::SampledField;

namespace {

constexpr double kPi = std::numbers::pi;

// 512^2 resolves |l| <= 75; plenty for the small-l cases and much faster
const GridSpec kSmallGrid{512, 512, 2.0};

double overlap_mod(const SampledField& a, const SampledField& b) {
  return std::abs(fields::overlap(a.normalized(), b.normalized()));
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("grid resolution cap") {
  CHECK(GridSpec{}.max_ell() == 150);
  CHECK(kSmallGrid.max_ell() == 75);
}

TEST_CASE("synth_oam rejects l = 0 and under-resolved grids") {
  CHECK_THROWS_AS(fields::synth_oam(0, kSmallGrid), std::domain_error);
  CHECK_THROWS_AS(fields::synth_oam(76, kSmallGrid), std::domain_error);
  CHECK_THROWS_AS(fields::synth_oam(151), std::domain_error);
  CHECK_THROWS_WITH_AS(fields::synth_oam(151), doctest::Contains("150"),
                       std::domain_error);
}

TEST_CASE("synth_oam normalization and orthogonality") {
  const auto f1 = fields::synth_oam(1, kSmallGrid);
  CHECK(std::abs(fields::overlap(f1, f1).real() - 1.0) < 1e-6);

  for (int ell : {1, 10}) {
    const auto fp = fields::synth_oam(ell, kSmallGrid);
    const auto fm = fields::synth_oam(-ell, kSmallGrid);
    CHECK(std::abs(fields::overlap(fp, fm)) < 1e-6);
  }
  // the paper's largest twist needs the full default grid
  const auto fp = fields::synth_oam(100);
  const auto fm = fields::synth_oam(-100);
  CHECK(std::abs(fields::overlap(fp, fm)) < 1e-6);
}

TEST_CASE("petal fields form the mutually unbiased pair") {
  const auto m1 = fields::synth_petal(2, Petal::M1, kSmallGrid);
  const auto m2 = fields::synth_petal(2, Petal::M2, kSmallGrid);
  CHECK(std::abs(fields::overlap(m1, m2)) < 1e-6);

  const auto p10_m1 = fields::synth_petal(10, Petal::M1, kSmallGrid);
  const auto oam10 = fields::synth_oam(10, kSmallGrid);
  const double p = std::norm(fields::overlap(p10_m1, oam10));
  CHECK(p == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("rotating M1 by pi/(2l) gives M2 up to a global phase") {
  const int ell = 2;
  const auto m1 = fields::synth_petal(ell, Petal::M1, kSmallGrid);
  const auto m2 = fields::synth_petal(ell, Petal::M2, kSmallGrid);
  const auto rotated = fields::rotate_field(m1, kPi / (2.0 * ell));
  CHECK(overlap_mod(rotated, m2) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("rotate_field phase equivalence") {
  const auto f = fields::synth_oam(1, kSmallGrid);
  const auto same = fields::rotate_field(f, 0.0);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(f.values[i] - same.values[i]));
  }
  CHECK(max_diff < 1e-15);  // resampling at phi = 0 hits grid points exactly

  // e^{i l phi} with l = 1, phi = pi/2 is a factor i
  const auto quarter = fields::rotate_field(f, kPi / 2.0);
  SampledField i_f = f;
  for (auto& v : i_f.values) v *= fields::cplx(0.0, 1.0);
  CHECK(overlap_mod(quarter, i_f) == doctest::Approx(1.0).epsilon(1e-3));

  // full phase cycle at l = 100 (needs the default grid)
  const auto f100 = fields::synth_oam(100);
  const auto cycled = fields::rotate_field(f100, 2.0 * kPi / 100.0);
  CHECK(overlap_mod(cycled, f100) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("rotation is linear in the field") {
  const auto a = fields::synth_oam(3, kSmallGrid);
  const auto b = fields::synth_oam(-3, kSmallGrid);
  SampledField sum = a;
  for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += b.values[i];
  sum.ell_content.reset();

  const auto rot_sum = fields::rotate_field(sum, 0.37);
  const auto rot_a = fields::rotate_field(a, 0.37);
  const auto rot_b = fields::rotate_field(b, 0.37);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < sum.values.size(); ++i) {
    max_diff = std::max(
        max_diff, std::abs(rot_sum.values[i] - rot_a.values[i] - rot_b.values[i]));
  }
  CHECK(max_diff < 1e-12);
}

TEST_CASE("overlap is Hermitian") {
  const auto a = fields::synth_petal(4, Petal::M1, kSmallGrid);
  const auto b = fields::synth_oam(4, kSmallGrid);
  const auto ab = fields::overlap(a, b);
  const auto ba = fields::overlap(b, a);
  CHECK(ab == std::conj(ba));
}

TEST_CASE("sampled-field MUB overlaps match hadamard_mub") {
  const auto h = fock::hadamard_mub();
  for (int ell : {1, 10, 100}) {
    const GridSpec grid{};  // full grid covers all three
    const auto fp = fields::synth_oam(ell, grid);
    const auto fm = fields::synth_oam(-ell, grid);
    const auto m1 = fields::synth_petal(ell, Petal::M1, grid);
    const auto m2 = fields::synth_petal(ell, Petal::M2, grid);

    CHECK(std::abs(fields::overlap(fp, m1) - h(0, 0)) < 1e-3);
    CHECK(std::abs(fields::overlap(fm, m1) - h(1, 0)) < 1e-3);
    CHECK(std::abs(fields::overlap(fp, m2) - h(0, 1)) < 1e-3);
    CHECK(std::abs(fields::overlap(fm, m2) - h(1, 1)) < 1e-3);
  }
}

TEST_CASE("hologram export is deterministic") {
  const auto petal = fields::synth_petal(2, Petal::M1, kSmallGrid);
  fields::HologramSpec spec;
  spec.grating_period_px = 8.0;

  const auto p1 = temp_file("noon_holo_a.pgm");
  const auto p2 = temp_file("noon_holo_b.pgm");
  fields::export_hologram(petal, spec, p1);
  fields::export_hologram(petal, spec, p2);
  CHECK(io::file_digest(p1) == io::file_digest(p2));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("carve masking differs from plain phase only below the amplitude peak") {
  const auto petal = fields::synth_petal(2, Petal::M1, kSmallGrid);
  fields::HologramSpec plain;
  fields::HologramSpec carve;
  carve.masking = fields::HologramSpec::Masking::Carve;

  const auto img_plain = fields::render_hologram(petal, plain);
  const auto img_carve = fields::render_hologram(petal, carve);
  double max_abs = 0.0;
  for (const auto& v : petal.values) max_abs = std::max(max_abs, std::abs(v));

  REQUIRE(img_plain.pixels.size() == img_carve.pixels.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < img_plain.pixels.size(); ++i) {
    if (img_plain.pixels[i] != img_carve.pixels[i]) {
      any_diff = true;
      CHECK(std::abs(petal.values[i]) < max_abs);
    }
  }
  CHECK(any_diff);
}

TEST_CASE("no export accepts l = 0 fields") {
  auto f = fields::synth_oam(1, kSmallGrid);
  f.ell_content = 0;  // hand-built field tagged as twist-free
  fields::HologramSpec spec;
  CHECK_THROWS_AS(fields::export_hologram(f, spec, temp_file("never.pgm")),
                  std::domain_error);
}

TEST_CASE("hologram spec validation") {
  const auto petal = fields::synth_petal(2, Petal::M1, kSmallGrid);
  fields::HologramSpec bad;
  bad.grating_period_px = 1.0;
  CHECK_THROWS_AS(fields::render_hologram(petal, bad), std::domain_error);
}
