#include "ldct/fbp.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <thread>
#include <vector>

#include "ldct/fft.hpp"

namespace ldct {

namespace {

// Band-limited ramp kernel sampled at pitch tau, wrapped into an FFT buffer
// of length n (negative lags stored at the top end).
std::vector<std::complex<double>> ramp_kernel_fft(size_t n, double tau,
                                                  FbpFilter filter) {
  std::vector<std::complex<double>> h(n, 0.0);
  h[0] = 1.0 / (4.0 * tau * tau);
  for (size_t k = 1; k <= n / 2; ++k) {
    double v = 0.0;
    if (k % 2 == 1) {
      const double d = std::numbers::pi * static_cast<double>(k) * tau;
      v = -1.0 / (d * d);
    }
    h[k] = v;
    if (k < n) h[n - k] = v;
  }
  fft(h, false);
  if (filter == FbpFilter::Hann) {
    for (size_t k = 0; k < n; ++k) {
      const double f = (k <= n / 2) ? static_cast<double>(k)
                                    : static_cast<double>(k) - static_cast<double>(n);
      const double w = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * f / static_cast<double>(n)));
      h[k] *= w;
    }
  }
  return h;
}

void backproject_rows(const std::vector<double>& filt, const FanBeamGeometry& g,
                      const GridShape& shape, double* out, int row0, int row1) {
  const int nb = g.num_bins;
  const double d = g.src_to_iso_mm;
  const double tau = g.virtual_bin_size_mm();
  const double cx = 0.5 * (shape.width - 1);
  const double cy = 0.5 * (shape.height - 1);
  const double dbeta = g.angular_span_deg * std::numbers::pi / 180.0 / g.num_views;
  const double scale = 0.5 * dbeta;

  std::vector<double> sinb(g.num_views), cosb(g.num_views);
  for (int v = 0; v < g.num_views; ++v) {
    const double beta = g.view_angle_rad(v);
    sinb[v] = std::sin(beta);
    cosb[v] = std::cos(beta);
  }

  for (int i = row0; i < row1; ++i) {
    const double y = (cy - i) * shape.pixel_size_mm;
    for (int j = 0; j < shape.width; ++j) {
      const double x = (j - cx) * shape.pixel_size_mm;
      double acc = 0.0;
      for (int v = 0; v < g.num_views; ++v) {
        const double u_dist = d + x * sinb[v] - y * cosb[v];
        if (u_dist <= 0.0) continue;  // behind the source
        const double t = x * cosb[v] + y * sinb[v];
        const double up = d * t / u_dist;
        const double c = up / tau + 0.5 * (nb - 1);
        const int b0 = static_cast<int>(std::floor(c));
        if (b0 < -1 || b0 > nb - 1) continue;
        const double f = c - b0;
        double q = 0.0;
        if (b0 >= 0) q += (1.0 - f) * filt[static_cast<size_t>(v) * nb + b0];
        if (b0 + 1 <= nb - 1) q += f * filt[static_cast<size_t>(v) * nb + b0 + 1];
        acc += q * (d * d) / (u_dist * u_dist);
      }
      out[static_cast<size_t>(i) * shape.width + j] = acc * scale;
    }
  }
}

}  // namespace

ImageGrid fbp_reconstruct(const Sinogram& sino, const FanBeamGeometry& geom,
                          const GridShape& shape, FbpFilter filter, int threads) {
  validate(geom);
  validate(sino, geom);
  if (std::fabs(geom.angular_span_deg - 360.0) > 1e-9)
    throw ConfigError("fbp_reconstruct: requires a full 360-degree orbit");

  const int nb = geom.num_bins;
  const double d = geom.src_to_iso_mm;
  const double tau = geom.virtual_bin_size_mm();
  const size_t n = next_pow2(static_cast<size_t>(2) * nb);
  const auto kernel = ramp_kernel_fft(n, tau, filter);

  // Cosine pre-weighting and per-view ramp filtering on the virtual detector.
  std::vector<double> filt(static_cast<size_t>(geom.num_views) * nb);
  std::vector<std::complex<double>> buf(n);
  for (int v = 0; v < geom.num_views; ++v) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (int b = 0; b < nb; ++b) {
      const double u = (b - 0.5 * (nb - 1)) * tau;
      buf[b] = sino.at(v, b) * d / std::hypot(d, u);
    }
    fft(buf, false);
    for (size_t k = 0; k < n; ++k) buf[k] *= kernel[k];
    fft(buf, true);
    for (int b = 0; b < nb; ++b)
      filt[static_cast<size_t>(v) * nb + b] = buf[b].real() * tau;
  }

  ImageGrid img(shape.width, shape.height, shape.pixel_size_mm);
  if (threads <= 1) {
    backproject_rows(filt, geom, shape, img.values.data(), 0, shape.height);
    return img;
  }
  std::vector<std::thread> pool;
  const int rows_per = (shape.height + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * rows_per, hi = std::min(shape.height, lo + rows_per);
    if (lo >= hi) break;
    pool.emplace_back(backproject_rows, std::cref(filt), std::cref(geom),
                      std::cref(shape), img.values.data(), lo, hi);
  }
  for (auto& t : pool) t.join();
  return img;
}

std::vector<uint8_t> fov_mask(const FanBeamGeometry& geom, const GridShape& shape) {
  std::vector<uint8_t> mask(static_cast<size_t>(shape.width) * shape.height, 0);
  const double r = geom.fov_radius_mm();
  const double cx = 0.5 * (shape.width - 1);
  const double cy = 0.5 * (shape.height - 1);
  for (int i = 0; i < shape.height; ++i) {
    const double y = (cy - i) * shape.pixel_size_mm;
    for (int j = 0; j < shape.width; ++j) {
      const double x = (j - cx) * shape.pixel_size_mm;
      mask[static_cast<size_t>(i) * shape.width + j] = (x * x + y * y <= r * r) ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace ldct
