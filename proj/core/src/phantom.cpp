#include "ldct/phantom.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ldct/rng.hpp"

namespace ldct {

namespace {

struct Ellipse {
  double value;  // painted value (blobs) or additive intensity (Shepp-Logan)
  double a, b;   // semi-axes in [-1,1] coordinates
  double x0, y0;
  double cos_phi, sin_phi;

  bool contains(double x, double y) const {
    const double dx = x - x0, dy = y - y0;
    const double xr = dx * cos_phi + dy * sin_phi;
    const double yr = -dx * sin_phi + dy * cos_phi;
    return (xr * xr) / (a * a) + (yr * yr) / (b * b) <= 1.0;
  }
};

// The standard 10-ellipse Shepp-Logan head phantom; additive intensities,
// peak 2.0 on the skull ring.
std::vector<Ellipse> shepp_logan_table() {
  struct Row { double A, a, b, x0, y0, phi_deg; };
  static const Row rows[] = {
      {2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
      {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
      {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
      {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
      {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
      {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
      {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
      {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
      {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
      {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
  };
  std::vector<Ellipse> out;
  for (const Row& r : rows) {
    const double phi = r.phi_deg * std::numbers::pi / 180.0;
    out.push_back({r.A, r.a, r.b, r.x0, r.y0, std::cos(phi), std::sin(phi)});
  }
  return out;
}

constexpr int kSS = 4;  // supersampling factor per axis

ImageGrid rasterize_additive(int size, const std::vector<Ellipse>& shapes,
                             double scale, double pix) {
  ImageGrid img(size, size, pix);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      double acc = 0.0;
      for (int si = 0; si < kSS; ++si) {
        for (int sj = 0; sj < kSS; ++sj) {
          const double x = ((j + (sj + 0.5) / kSS) * 2.0) / size - 1.0;
          const double y = 1.0 - ((i + (si + 0.5) / kSS) * 2.0) / size;
          double v = 0.0;
          for (const Ellipse& e : shapes)
            if (e.contains(x, y)) v += e.value;
          acc += v;
        }
      }
      img.at(i, j) = scale * acc / (kSS * kSS);
    }
  }
  return img;
}

// Paint-order semantics: the last shape containing a point wins.
ImageGrid rasterize_painted(int size, const std::vector<Ellipse>& shapes,
                            double pix) {
  ImageGrid img(size, size, pix);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      double acc = 0.0;
      for (int si = 0; si < kSS; ++si) {
        for (int sj = 0; sj < kSS; ++sj) {
          const double x = ((j + (sj + 0.5) / kSS) * 2.0) / size - 1.0;
          const double y = 1.0 - ((i + (si + 0.5) / kSS) * 2.0) / size;
          double v = 0.0;
          for (const Ellipse& e : shapes)
            if (e.contains(x, y)) v = e.value;
          acc += v;
        }
      }
      img.at(i, j) = acc / (kSS * kSS);
    }
  }
  return img;
}

ImageGrid make_disk_grid(int size, uint64_t seed, double amax, double pix) {
  // 3x3 grid of disks; radii and values derived from integer hashes so the
  // image is reproducible bit-for-bit everywhere (no libm involved).
  ImageGrid img(size, size, pix);
  const int g = 3;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      double acc = 0.0;
      for (int si = 0; si < kSS; ++si) {
        for (int sj = 0; sj < kSS; ++sj) {
          const double x = ((j + (sj + 0.5) / kSS) * 2.0) / size - 1.0;
          const double y = 1.0 - ((i + (si + 0.5) / kSS) * 2.0) / size;
          double v = 0.0;
          for (int a = 0; a < g; ++a) {
            for (int b = 0; b < g; ++b) {
              const uint64_t h = mix64(seed * 1315423911ULL + a * g + b);
              const double r = (0.22 + 0.10 * ((h >> 8) & 0xFF) / 255.0) / g * 2.0;
              const double cx = (2.0 * a + 1.0) / g - 1.0;
              const double cy = (2.0 * b + 1.0) / g - 1.0;
              const double dx = x - cx, dy = y - cy;
              if (dx * dx + dy * dy <= r * r)
                v = amax * (0.25 + 0.75 * (h & 0xFF) / 255.0);
            }
          }
          acc += v;
        }
      }
      img.at(i, j) = acc / (kSS * kSS);
    }
  }
  return img;
}

ImageGrid make_piecewise_blobs(int size, uint64_t seed, double amax, double pix) {
  CounterRng rng(seed, 0x70686172ULL);  // phantom stream
  std::vector<Ellipse> shapes;
  // Body ellipse.
  shapes.push_back({0.5 * amax, 0.82, 0.88, 0.0, 0.0, 1.0, 0.0});
  const int n_blobs = 6 + static_cast<int>(rng.next_u64() % 4);
  for (int k = 0; k < n_blobs; ++k) {
    const double a = 0.06 + 0.22 * rng.uniform();
    const double b = 0.06 + 0.22 * rng.uniform();
    const double x0 = -0.55 + 1.1 * rng.uniform();
    const double y0 = -0.55 + 1.1 * rng.uniform();
    const double phi = std::numbers::pi * rng.uniform();
    // First blob pinned to the maximum so the support bounds [0, amax] are
    // identical for every seed.
    const double v = (k == 0) ? amax : amax * (0.15 + 0.75 * rng.uniform());
    shapes.push_back({v, a, b, x0, y0, std::cos(phi), std::sin(phi)});
  }
  return rasterize_painted(size, shapes, pix);
}

}  // namespace

PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "shepp_logan") return PhantomKind::SheppLogan;
  if (s == "disk_grid") return PhantomKind::DiskGrid;
  if (s == "piecewise_blobs") return PhantomKind::PiecewiseBlobs;
  throw ConfigError("unknown phantom kind: " + s);
}

ImageGrid make_phantom(int size, PhantomKind kind, uint64_t seed,
                       double attenuation_max, double pixel_size_mm) {
  if (size < 16) throw ConfigError("make_phantom: size must be >= 16");
  if (attenuation_max <= 0) throw ConfigError("make_phantom: attenuation_max must be > 0");
  switch (kind) {
    case PhantomKind::SheppLogan:
      return rasterize_additive(size, shepp_logan_table(), attenuation_max / 2.0,
                                pixel_size_mm);
    case PhantomKind::DiskGrid:
      return make_disk_grid(size, seed, attenuation_max, pixel_size_mm);
    case PhantomKind::PiecewiseBlobs:
      return make_piecewise_blobs(size, seed, attenuation_max, pixel_size_mm);
  }
  throw ConfigError("make_phantom: unknown kind");
}

}  // namespace ldct
