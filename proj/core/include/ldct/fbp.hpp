#pragma once

#include "ldct/projector.hpp"
#include "ldct/types.hpp"

namespace ldct {

enum class FbpFilter { Ramp, Hann };

// Equispaced-detector fan-beam filtered backprojection over a full 360-degree
// orbit: cosine pre-weighting on the virtual detector through the isocenter,
// ramp filtering by zero-padded FFT (length >= 2 * num_bins), and
// distance-weighted backprojection with linear detector interpolation.
// Scaled so a noiseless forward projection reconstructs at the original
// attenuation magnitude.
ImageGrid fbp_reconstruct(const Sinogram& sino, const FanBeamGeometry& geom,
                          const GridShape& shape,
                          FbpFilter filter = FbpFilter::Ramp, int threads = 1);

// Mask of pixels inside the field-of-view circle covered by every view.
std::vector<uint8_t> fov_mask(const FanBeamGeometry& geom, const GridShape& shape);

}  // namespace ldct
