#include "ldct/projector.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace ldct {

namespace {

struct Ray {
  double sx, sy;  // source
  double dx, dy;  // direction (source -> detector bin), unnormalized
};

inline Ray make_ray(const FanBeamGeometry& g, int view, int bin) {
  const double beta = g.view_angle_rad(view);
  const double sb = std::sin(beta), cb = std::cos(beta);
  const double sx = -g.src_to_iso_mm * sb;
  const double sy = g.src_to_iso_mm * cb;
  // Central ray direction and detector axis.
  const double wx = sb, wy = -cb;
  const double ux = cb, uy = sb;
  const double off = (bin - 0.5 * (g.num_bins - 1)) * g.bin_size_mm;
  const double px = sx + g.src_to_det_mm * wx + off * ux;
  const double py = sy + g.src_to_det_mm * wy + off * uy;
  return Ray{sx, sy, px - sx, py - sy};
}

// Joseph traversal: visit(linear_pixel_index, weight) for every pixel the ray
// touches. Used for both gather (forward) and scatter (adjoint) so the two
// operators share the exact same weights.
template <typename Visit>
inline void trace_ray(const Ray& r, int width, int height, double pix, Visit&& visit) {
  const double cx = 0.5 * (width - 1);
  const double cy = 0.5 * (height - 1);
  const double adx = std::fabs(r.dx), ady = std::fabs(r.dy);
  const double len = std::hypot(r.dx, r.dy);

  if (adx >= ady) {
    // x-driving: one sample per image column.
    const double step = pix * len / adx;
    const double slope = r.dy / r.dx;
    for (int j = 0; j < width; ++j) {
      const double x = (j - cx) * pix;
      const double y = r.sy + (x - r.sx) * slope;
      const double row = cy - y / pix;
      const int i0 = static_cast<int>(std::floor(row));
      const double f = row - i0;
      if (i0 >= 0 && i0 < height && f != 1.0)
        visit(static_cast<size_t>(i0) * width + j, (1.0 - f) * step);
      if (i0 + 1 >= 0 && i0 + 1 < height && f != 0.0)
        visit(static_cast<size_t>(i0 + 1) * width + j, f * step);
    }
  } else {
    // y-driving: one sample per image row.
    const double step = pix * len / ady;
    const double slope = r.dx / r.dy;
    for (int i = 0; i < height; ++i) {
      const double y = (cy - i) * pix;
      const double x = r.sx + (y - r.sy) * slope;
      const double col = x / pix + cx;
      const int j0 = static_cast<int>(std::floor(col));
      const double f = col - j0;
      if (j0 >= 0 && j0 < width && f != 1.0)
        visit(static_cast<size_t>(i) * width + j0, (1.0 - f) * step);
      if (j0 + 1 >= 0 && j0 + 1 < width && f != 0.0)
        visit(static_cast<size_t>(i) * width + j0 + 1, f * step);
    }
  }
}

void forward_views(const double* img, const FanBeamGeometry& g, int width,
                   int height, double pix, double* out, int v0, int v1) {
  for (int v = v0; v < v1; ++v) {
    for (int b = 0; b < g.num_bins; ++b) {
      const Ray r = make_ray(g, v, b);
      double acc = 0.0;
      trace_ray(r, width, height, pix,
                [&](size_t idx, double w) { acc += img[idx] * w; });
      out[static_cast<size_t>(v) * g.num_bins + b] = acc;
    }
  }
}

void adjoint_views(const double* sino, const FanBeamGeometry& g, int width,
                   int height, double pix, double* img, int v0, int v1) {
  for (int v = v0; v < v1; ++v) {
    for (int b = 0; b < g.num_bins; ++b) {
      const double s = sino[static_cast<size_t>(v) * g.num_bins + b];
      if (s == 0.0) continue;
      const Ray r = make_ray(g, v, b);
      trace_ray(r, width, height, pix,
                [&](size_t idx, double w) { img[idx] += s * w; });
    }
  }
}

// Split [0, n) into `parts` contiguous chunks.
std::vector<std::pair<int, int>> chunks(int n, int parts) {
  parts = std::clamp(parts, 1, std::max(1, n));
  std::vector<std::pair<int, int>> out;
  const int base = n / parts, rem = n % parts;
  int lo = 0;
  for (int p = 0; p < parts; ++p) {
    const int hi = lo + base + (p < rem ? 1 : 0);
    out.emplace_back(lo, hi);
    lo = hi;
  }
  return out;
}

}  // namespace

Sinogram forward_project(const ImageGrid& image, const FanBeamGeometry& geom,
                         int threads) {
  validate(image);
  validate(geom);
  Sinogram sino(geom.num_views, geom.num_bins);
  const auto parts = chunks(geom.num_views, threads);
  if (parts.size() == 1) {
    forward_views(image.values.data(), geom, image.width, image.height,
                  image.pixel_size_mm, sino.values.data(), 0, geom.num_views);
    return sino;
  }
  std::vector<std::thread> pool;
  for (const auto& [lo, hi] : parts)
    pool.emplace_back(forward_views, image.values.data(), std::cref(geom),
                      image.width, image.height, image.pixel_size_mm,
                      sino.values.data(), lo, hi);
  for (auto& t : pool) t.join();
  return sino;
}

ImageGrid back_project(const Sinogram& sino, const FanBeamGeometry& geom,
                       const GridShape& shape, int threads) {
  validate(geom);
  validate(sino, geom);
  ImageGrid img(shape.width, shape.height, shape.pixel_size_mm);
  const auto parts = chunks(geom.num_views, threads);
  if (parts.size() == 1) {
    adjoint_views(sino.values.data(), geom, shape.width, shape.height,
                  shape.pixel_size_mm, img.values.data(), 0, geom.num_views);
    return img;
  }
  // Per-thread accumulators, reduced in chunk order so the result is
  // deterministic for a fixed thread count.
  std::vector<std::vector<double>> partial(parts.size(),
                                           std::vector<double>(img.size(), 0.0));
  std::vector<std::thread> pool;
  for (size_t p = 0; p < parts.size(); ++p)
    pool.emplace_back(adjoint_views, sino.values.data(), std::cref(geom),
                      shape.width, shape.height, shape.pixel_size_mm,
                      partial[p].data(), parts[p].first, parts[p].second);
  for (auto& t : pool) t.join();
  for (const auto& buf : partial)
    for (size_t i = 0; i < buf.size(); ++i) img.values[i] += buf[i];
  return img;
}

void ProjectorOperator::apply(const double* x, double* y) const {
  ImageGrid img(shape_.width, shape_.height, shape_.pixel_size_mm);
  std::copy(x, x + img.size(), img.values.begin());
  Sinogram s = forward_project(img, geom_, threads_);
  std::copy(s.values.begin(), s.values.end(), y);
}

void ProjectorOperator::apply_adjoint(const double* s, double* x) const {
  Sinogram sino(geom_.num_views, geom_.num_bins);
  std::copy(s, s + sino.size(), sino.values.begin());
  ImageGrid img = back_project(sino, geom_, shape_, threads_);
  std::copy(img.values.begin(), img.values.end(), x);
}

}  // namespace ldct
