#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ldct/errors.hpp"

namespace ldct {

// 2D attenuation map on a square pixel lattice. Row-major, row 0 at the top,
// pixel (0,0) in the upper-left corner, grid centered on the isocenter.
// Values are linear attenuation coefficients per mm.
struct ImageGrid {
  int width = 0;
  int height = 0;
  double pixel_size_mm = 1.0;
  std::vector<double> values;

  ImageGrid() = default;
  ImageGrid(int w, int h, double pix)
      : width(w), height(h), pixel_size_mm(pix),
        values(static_cast<size_t>(w) * h, 0.0) {}

  double& at(int row, int col) { return values[static_cast<size_t>(row) * width + col]; }
  double at(int row, int col) const { return values[static_cast<size_t>(row) * width + col]; }
  size_t size() const { return values.size(); }

  // World x of a column center (mm, isocenter at 0, +x right).
  double world_x(double col) const { return (col - 0.5 * (width - 1)) * pixel_size_mm; }
  // World y of a row center (mm, isocenter at 0, +y up).
  double world_y(double row) const { return (0.5 * (height - 1) - row) * pixel_size_mm; }
};

// Fan-beam scanner: source on a circle of radius src_to_iso_mm, flat
// equispaced detector at src_to_det_mm from the source, views evenly spaced
// over angular_span_deg.
struct FanBeamGeometry {
  int num_views = 0;
  int num_bins = 0;
  double bin_size_mm = 1.0;
  double src_to_det_mm = 1000.0;
  double src_to_iso_mm = 500.0;
  double angular_span_deg = 360.0;

  double view_angle_rad(int view) const {
    return view * (angular_span_deg * std::numbers::pi / 180.0) / num_views;
  }
  // Detector magnification when rescaled to a virtual detector through the
  // isocenter.
  double virtual_bin_size_mm() const {
    return bin_size_mm * src_to_iso_mm / src_to_det_mm;
  }
  // Radius of the field-of-view circle covered by every view.
  double fov_radius_mm() const {
    const double half_w = 0.5 * num_bins * virtual_bin_size_mm();
    return src_to_iso_mm * half_w / std::hypot(half_w, src_to_iso_mm);
  }
};

// Line integrals [Ax], row-major (view, bin). Dimensionless.
struct Sinogram {
  int num_views = 0;
  int num_bins = 0;
  std::vector<double> values;

  Sinogram() = default;
  Sinogram(int nv, int nb)
      : num_views(nv), num_bins(nb),
        values(static_cast<size_t>(nv) * nb, 0.0) {}

  double& at(int view, int bin) { return values[static_cast<size_t>(view) * num_bins + bin]; }
  double at(int view, int bin) const { return values[static_cast<size_t>(view) * num_bins + bin]; }
  size_t size() const { return values.size(); }
};

// Noisy detector counts, same layout as Sinogram.
struct RawCounts {
  int num_views = 0;
  int num_bins = 0;
  std::vector<double> values;

  RawCounts() = default;
  RawCounts(int nv, int nb)
      : num_views(nv), num_bins(nb),
        values(static_cast<size_t>(nv) * nb, 0.0) {}
  size_t size() const { return values.size(); }
};

// Incident photons per ray and electronic noise variance (counts^2).
struct DoseModel {
  double intensity = 1e5;
  double sigma_e2 = 0.0;
};

inline void validate(const ImageGrid& img) {
  if (img.width <= 0 || img.height <= 0 || img.pixel_size_mm <= 0)
    throw ConfigError("ImageGrid: dimensions and pixel size must be positive");
  if (img.values.size() != static_cast<size_t>(img.width) * img.height)
    throw ConfigError("ImageGrid: value array length != width*height");
  for (double v : img.values)
    if (!std::isfinite(v)) throw ConfigError("ImageGrid: non-finite value");
}

inline void validate(const FanBeamGeometry& g) {
  if (g.num_views < 1 || g.num_bins < 1)
    throw ConfigError("FanBeamGeometry: need at least one view and one bin");
  if (!(g.src_to_det_mm > g.src_to_iso_mm && g.src_to_iso_mm > 0))
    throw ConfigError("FanBeamGeometry: require src_to_det > src_to_iso > 0");
  if (g.bin_size_mm <= 0) throw ConfigError("FanBeamGeometry: bin size must be positive");
}

inline void validate(const Sinogram& s, const FanBeamGeometry& g) {
  if (s.num_views != g.num_views || s.num_bins != g.num_bins)
    throw ConfigError("Sinogram: dimensions do not match geometry");
  if (s.values.size() != static_cast<size_t>(s.num_views) * s.num_bins)
    throw ConfigError("Sinogram: value array length != views*bins");
  for (double v : s.values)
    if (!std::isfinite(v)) throw ConfigError("Sinogram: non-finite value");
}

inline void validate(const DoseModel& d) {
  if (!(d.intensity > 0)) throw ConfigError("DoseModel: intensity must be positive");
  if (d.sigma_e2 < 0) throw ConfigError("DoseModel: sigma_e2 must be >= 0");
}

}  // namespace ldct
