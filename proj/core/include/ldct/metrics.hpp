#pragma once

#include <cstdint>
#include <vector>

#include "ldct/types.hpp"

namespace ldct {

struct MetricReport {
  double psnr_db = 0.0;
  double rmse = 0.0;  // image units
  double ssim = 0.0;
};

double rmse(const ImageGrid& x, const ImageGrid& ref);

// Peak = max of the reference image; identical images report +inf.
double psnr(const ImageGrid& x, const ImageGrid& ref);

// Variants restricted to mask != 0 (e.g. the FOV circle).
double rmse_masked(const ImageGrid& x, const ImageGrid& ref,
                   const std::vector<uint8_t>& mask);
double psnr_masked(const ImageGrid& x, const ImageGrid& ref,
                   const std::vector<uint8_t>& mask);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// dynamic range = max(ref) - min(ref), valid windows only.
double ssim(const ImageGrid& x, const ImageGrid& ref);

MetricReport evaluate(const ImageGrid& x, const ImageGrid& ref);

enum class Axis { Row, Column };

std::vector<double> line_profile(const ImageGrid& x, int index, Axis axis);

// Hounsfield rescaling with air at -1000 HU: hu = 1000 * (mu - mu_water) / mu_water.
ImageGrid to_hounsfield(const ImageGrid& x, double mu_water);

}  // namespace ldct
