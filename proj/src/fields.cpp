#include "noon/fields.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace noon::fields {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_grid(const GridSpec& g) {
  if (g.width_px < 16 || g.height_px < 16) {
    throw std::domain_error("grid must be at least 16x16 pixels");
  }
  if (g.width_px != g.height_px) {
    // the ring envelope geometry assumes a square window
    throw std::domain_error("field synthesis requires a square grid");
  }
  if (g.half_extent_mm <= 0.0) {
    throw std::domain_error("grid half extent must be positive");
  }
}

void check_ell_resolved(int ell, const GridSpec& g) {
  if (ell == 0) {
    throw std::domain_error("ell = 0 is not a valid OAM mode");
  }
  const int cap = g.max_ell();
  if (std::abs(ell) > cap) {
    const double ring_px = g.ring_radius_mm() / g.pixel_mm();
    throw std::domain_error(
        "grid under-resolves ell = " + std::to_string(ell) + ": " +
        std::to_string(16 * std::abs(ell)) +
        " ring samples required (8 per azimuthal cycle, 2|ell| cycles), " +
        std::to_string(kTwoPi * ring_px) + " available; maximum |ell| is " +
        std::to_string(cap));
  }
}

}  // namespace

int GridSpec::max_ell() const {
  const double ring_px = ring_radius_mm() / pixel_mm();
  return static_cast<int>(std::floor(kTwoPi * ring_px / 16.0));
}

double SampledField::norm() const {
  double n2 = 0.0;
  for (const cplx& v : values) n2 += std::norm(v);
  return std::sqrt(n2 * grid.cell_area_mm2());
}

SampledField SampledField::normalized() const {
  SampledField out = *this;
  const double n = norm();
  if (n <= 0.0) throw std::domain_error("cannot normalize a zero field");
  for (cplx& v : out.values) v /= n;
  return out;
}

cplx overlap(const SampledField& a, const SampledField& b) {
  if (!(a.grid == b.grid)) {
    throw std::domain_error("overlap requires identical grids");
  }
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    acc += std::conj(a.values[i]) * b.values[i];
  }
  return acc * a.grid.cell_area_mm2();
}

SampledField synth_oam(int ell, const GridSpec& grid) {
  check_grid(grid);
  check_ell_resolved(ell, grid);
  const double r0 = grid.ring_radius_mm();
  const double sr = grid.ring_sigma_mm();

  SampledField f;
  f.grid = grid;
  f.values.resize(std::size_t(grid.width_px) * grid.height_px);
  f.ell_content = ell;
  for (int iy = 0; iy < grid.height_px; ++iy) {
    const double y = grid.y_at(iy);
    for (int ix = 0; ix < grid.width_px; ++ix) {
      const double x = grid.x_at(ix);
      const double r = std::hypot(x, y);
      const double env = std::exp(-(r - r0) * (r - r0) / (2.0 * sr * sr));
      f.at(ix, iy) = env * std::exp(cplx(0.0, ell * std::atan2(y, x)));
    }
  }
  return f.normalized();
}

SampledField synth_petal(int ell, Petal which, const GridSpec& grid) {
  SampledField plus = synth_oam(std::abs(ell), grid);
  SampledField minus = synth_oam(-std::abs(ell), grid);
  SampledField f;
  f.grid = grid;
  f.values.resize(plus.values.size());
  const double sign = (which == Petal::M1) ? 1.0 : -1.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.values[i] = plus.values[i] + sign * minus.values[i];
  }
  f.ell_content = std::abs(ell);
  return f.normalized();
}

SampledField rotate_field(const SampledField& field, double phi) {
  const GridSpec& g = field.grid;
  const int W = g.width_px;
  const int H = g.height_px;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double inv_px = 1.0 / g.pixel_mm();

  SampledField out;
  out.grid = g;
  out.values.assign(field.values.size(), cplx(0.0, 0.0));
  out.ell_content = field.ell_content;

  auto sample = [&](int ix, int iy) -> cplx {
    if (ix < 0 || ix >= W || iy < 0 || iy >= H) return cplx(0.0, 0.0);
    return field.at(ix, iy);
  };

  for (int iy = 0; iy < H; ++iy) {
    const double y = g.y_at(iy);
    for (int ix = 0; ix < W; ++ix) {
      const double x = g.x_at(ix);
      // source point: the field value at azimuth theta - phi
      const double xs = c * x + s * y;
      const double ys = -s * x + c * y;
      const double fi = xs * inv_px + 0.5 * W - 0.5;
      const double fj = ys * inv_px + 0.5 * H - 0.5;
      const int i0 = static_cast<int>(std::floor(fi));
      const int j0 = static_cast<int>(std::floor(fj));
      const double ti = fi - i0;
      const double tj = fj - j0;
      out.at(ix, iy) = sample(i0, j0) * ((1 - ti) * (1 - tj)) +
                       sample(i0 + 1, j0) * (ti * (1 - tj)) +
                       sample(i0, j0 + 1) * ((1 - ti) * tj) +
                       sample(i0 + 1, j0 + 1) * (ti * tj);
    }
  }
  return out;
}

GrayImage render_hologram(const SampledField& field, const HologramSpec& spec) {
  if (spec.grating_period_px < 2.0) {
    throw std::domain_error("grating period must be >= 2 px");
  }
  if (!(spec.phase_depth > 0.0) || spec.phase_depth > kTwoPi) {
    throw std::domain_error("phase depth must lie in (0, 2pi]");
  }
  const int W = spec.width_px > 0 ? spec.width_px : field.grid.width_px;
  const int H = spec.height_px > 0 ? spec.height_px : field.grid.height_px;

  double max_abs = 0.0;
  for (const cplx& v : field.values) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs <= 0.0) throw std::domain_error("hologram of a zero field");

  const GridSpec& g = field.grid;
  GrayImage img;
  img.width = W;
  img.height = H;
  img.pixels.resize(std::size_t(W) * H);

  for (int iy = 0; iy < H; ++iy) {
    for (int ix = 0; ix < W; ++ix) {
      // sample the field bilinearly at the output pixel's relative position
      const double fx = (ix + 0.5) / W * g.width_px - 0.5;
      const double fy = (iy + 0.5) / H * g.height_px - 0.5;
      const int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, g.width_px - 1);
      const int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, g.height_px - 1);
      const int i1 = std::min(i0 + 1, g.width_px - 1);
      const int j1 = std::min(j0 + 1, g.height_px - 1);
      const double ti = std::clamp(fx - i0, 0.0, 1.0);
      const double tj = std::clamp(fy - j0, 0.0, 1.0);
      const cplx v = field.at(i0, j0) * ((1 - ti) * (1 - tj)) +
                     field.at(i1, j0) * (ti * (1 - tj)) +
                     field.at(i0, j1) * ((1 - ti) * tj) +
                     field.at(i1, j1) * (ti * tj);

      double phase = std::arg(v) + kTwoPi * ix / spec.grating_period_px;
      phase = std::fmod(phase, kTwoPi);
      if (phase < 0.0) phase += kTwoPi;
      phase *= spec.phase_depth / kTwoPi;

      if (spec.masking == HologramSpec::Masking::Carve &&
          std::abs(v) < 0.5 * max_abs) {
        phase = 0.0;  // carved away
      }
      img.pixels[std::size_t(iy) * W + ix] =
          static_cast<std::uint8_t>(std::lround(phase / kTwoPi * 255.0));
    }
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) {
    throw std::runtime_error("short write to " + path.string());
  }
}

void export_hologram(const SampledField& field, const HologramSpec& spec,
                     const std::filesystem::path& path) {
  if (field.ell_content.has_value() && *field.ell_content == 0) {
    throw std::domain_error("refusing to export an ell = 0 field");
  }
  write_pgm(render_hologram(field, spec), path);
}

void write_field_csv(const SampledField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "x_mm,y_mm,re,im\n";
  char buf[128];
  const GridSpec& g = field.grid;
  for (int iy = 0; iy < g.height_px; ++iy) {
    for (int ix = 0; ix < g.width_px; ++ix) {
      const cplx v = field.at(ix, iy);
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.17g,%.17g\n", g.x_at(ix),
                    g.y_at(iy), v.real(), v.imag());
      out << buf;
    }
  }
}

}  // namespace noon::fields
