#include "ldct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ldct {

namespace {

void check_same_dims(const ImageGrid& x, const ImageGrid& ref, const char* who) {
  if (x.width != ref.width || x.height != ref.height)
    throw ConfigError(std::string(who) + ": image dimensions differ");
}

// Separable valid-region filtering with a normalized 1-D window.
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& win) {
  const int k = static_cast<int>(win.size());
  const int wo = w - k + 1, ho = h - k + 1;
  std::vector<double> rows(static_cast<size_t>(h) * wo);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < wo; ++j) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += win[t] * img[static_cast<size_t>(i) * w + j + t];
      rows[static_cast<size_t>(i) * wo + j] = s;
    }
  std::vector<double> out(static_cast<size_t>(ho) * wo);
  for (int i = 0; i < ho; ++i)
    for (int j = 0; j < wo; ++j) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += win[t] * rows[static_cast<size_t>(i + t) * wo + j];
      out[static_cast<size_t>(i) * wo + j] = s;
    }
  return out;
}

}  // namespace

double rmse(const ImageGrid& x, const ImageGrid& ref) {
  check_same_dims(x, ref, "rmse");
  double acc = 0.0;
  for (size_t i = 0; i < x.values.size(); ++i) {
    const double d = x.values[i] - ref.values[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(x.values.size()));
}

double psnr(const ImageGrid& x, const ImageGrid& ref) {
  const double e = rmse(x, ref);
  const double peak = *std::max_element(ref.values.begin(), ref.values.end());
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / e);
}

double rmse_masked(const ImageGrid& x, const ImageGrid& ref,
                   const std::vector<uint8_t>& mask) {
  check_same_dims(x, ref, "rmse_masked");
  if (mask.size() != x.values.size()) throw ConfigError("rmse_masked: mask size mismatch");
  double acc = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < x.values.size(); ++i) {
    if (!mask[i]) continue;
    const double d = x.values[i] - ref.values[i];
    acc += d * d;
    ++count;
  }
  if (count == 0) throw ConfigError("rmse_masked: empty mask");
  return std::sqrt(acc / static_cast<double>(count));
}

double psnr_masked(const ImageGrid& x, const ImageGrid& ref,
                   const std::vector<uint8_t>& mask) {
  const double e = rmse_masked(x, ref, mask);
  double peak = 0.0;
  for (size_t i = 0; i < ref.values.size(); ++i)
    if (mask[i]) peak = std::max(peak, ref.values[i]);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / e);
}

double ssim(const ImageGrid& x, const ImageGrid& ref) {
  check_same_dims(x, ref, "ssim");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5, kK1 = 0.01, kK2 = 0.03;
  if (x.width < kWin || x.height < kWin)
    throw ConfigError("ssim: image smaller than the 11x11 window");

  std::vector<double> win(kWin);
  double wsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    win[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    wsum += win[i];
  }
  for (auto& v : win) v /= wsum;

  const auto [mn, mx] = std::minmax_element(ref.values.begin(), ref.values.end());
  const double range = *mx - *mn;
  const double c1 = (kK1 * range) * (kK1 * range);
  const double c2 = (kK2 * range) * (kK2 * range);

  const size_t n = x.values.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (size_t i = 0; i < n; ++i) {
    xx[i] = x.values[i] * x.values[i];
    yy[i] = ref.values[i] * ref.values[i];
    xy[i] = x.values[i] * ref.values[i];
  }
  const int w = x.width, h = x.height;
  const auto mu_x = filter_valid(x.values, w, h, win);
  const auto mu_y = filter_valid(ref.values, w, h, win);
  const auto m_xx = filter_valid(xx, w, h, win);
  const auto m_yy = filter_valid(yy, w, h, win);
  const auto m_xy = filter_valid(xy, w, h, win);

  double acc = 0.0;
  for (size_t i = 0; i < mu_x.size(); ++i) {
    const double vx = m_xx[i] - mu_x[i] * mu_x[i];
    const double vy = m_yy[i] - mu_y[i] * mu_y[i];
    const double cov = m_xy[i] - mu_x[i] * mu_y[i];
    acc += ((2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2)) /
           ((mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(mu_x.size());
}

MetricReport evaluate(const ImageGrid& x, const ImageGrid& ref) {
  return MetricReport{psnr(x, ref), rmse(x, ref), ssim(x, ref)};
}

std::vector<double> line_profile(const ImageGrid& x, int index, Axis axis) {
  if (axis == Axis::Row) {
    if (index < 0 || index >= x.height) throw ConfigError("line_profile: row out of range");
    std::vector<double> out(x.width);
    for (int j = 0; j < x.width; ++j) out[j] = x.at(index, j);
    return out;
  }
  if (index < 0 || index >= x.width) throw ConfigError("line_profile: column out of range");
  std::vector<double> out(x.height);
  for (int i = 0; i < x.height; ++i) out[i] = x.at(i, index);
  return out;
}

ImageGrid to_hounsfield(const ImageGrid& x, double mu_water) {
  if (!(mu_water > 0)) throw ConfigError("to_hounsfield: mu_water must be > 0");
  ImageGrid out = x;
  for (auto& v : out.values) v = 1000.0 * (v - mu_water) / mu_water;
  return out;
}

}  // namespace ldct
