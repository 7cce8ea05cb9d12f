#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

// Transverse-field realization of the abstract modes: azimuthal OAM/petal
// synthesis on sampled grids, discrete overlap integrals, rotation by
// resampling, and hologram export.

namespace noon::fields {

using cplx = std::complex<double>;

/// Square Cartesian sampling window. Pixel centers are offset by half a
/// pixel so the optical axis never coincides with a sample point.
struct GridSpec {
  int width_px = 1024;
  int height_px = 1024;
  double half_extent_mm = 2.0;  // aperture half-width

  double pixel_mm() const { return 2.0 * half_extent_mm / width_px; }
  double cell_area_mm2() const { return pixel_mm() * pixel_mm(); }
  double x_at(int ix) const { return (ix + 0.5 - 0.5 * width_px) * pixel_mm(); }
  double y_at(int iy) const { return (iy + 0.5 - 0.5 * height_px) * pixel_mm(); }

  /// Ring-envelope geometry; fixed fractions of the aperture so the petal
  /// overlap algebra is exact by construction for every l.
  double ring_radius_mm() const { return 0.75 * half_extent_mm; }
  double ring_sigma_mm() const { return 0.06 * half_extent_mm; }

  /// Largest |l| the grid resolves with >= 8 samples per azimuthal cycle
  /// (2|l| cycles) on the reference ring. 150 for the default grid.
  int max_ell() const;

  bool operator==(const GridSpec&) const = default;
};

struct SampledField {
  GridSpec grid;
  std::vector<cplx> values;  // row-major, values[iy * width + ix]
  std::optional<int> ell_content;

  cplx& at(int ix, int iy) { return values[std::size_t(iy) * grid.width_px + ix]; }
  const cplx& at(int ix, int iy) const {
    return values[std::size_t(iy) * grid.width_px + ix];
  }

  /// sqrt(sum |v|^2 * cell area).
  double norm() const;
  SampledField normalized() const;
};

/// Discrete inner product <a|b> = sum conj(a) b * cell area.
cplx overlap(const SampledField& a, const SampledField& b);

enum class Petal { M1, M2 };

/// Ring-Gaussian envelope times e^{i l theta}, unit norm.
/// Throws std::domain_error for l = 0 or an under-resolved grid (the
/// message names the grid's maximum |l|).
SampledField synth_oam(int ell, const GridSpec& grid = {});

/// Petal (MUB) superposition of +l and -l: M1 ~ cos(l theta), M2 ~ sin(l theta).
SampledField synth_petal(int ell, Petal which, const GridSpec& grid = {});

/// Resample the field at theta - phi (bilinear). Linear in the field values;
/// no renormalization is applied.
SampledField rotate_field(const SampledField& field, double phi);

struct HologramSpec {
  double grating_period_px = 8.0;  // blazed grating along x, >= 2
  double phase_depth = 6.283185307179586476925286766559;  // (0, 2pi]
  enum class Masking { None, Carve } masking = Masking::None;
  int width_px = 0;   // 0: render at the field grid resolution
  int height_px = 0;
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 8-bit
};

/// arg(field) + blazed grating, modulo 2pi, quantized to 8 bits. Carve
/// masking blanks pixels whose relative amplitude is below 1/2.
GrayImage render_hologram(const SampledField& field, const HologramSpec& spec);

/// Binary 8-bit PGM (P5). Deterministic bytes for fixed inputs.
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

/// render_hologram + write_pgm. Rejects fields tagged with l = 0 content.
void export_hologram(const SampledField& field, const HologramSpec& spec,
                     const std::filesystem::path& path);

/// Field dump as CSV rows (x_mm, y_mm, re, im).
void write_field_csv(const SampledField& field, const std::filesystem::path& path);

}  // namespace noon::fields
