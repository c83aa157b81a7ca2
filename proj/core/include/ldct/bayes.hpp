#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ldct/fbp.hpp"
#include "ldct/network.hpp"
#include "ldct/types.hpp"

namespace ldct {

enum class ReconMode { Proposed, DipTv };

struct TrainConfig {
  double alpha = 0.2;   // TV weight
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int iterations = 4000;
  uint64_t seed = 0;
  int mc_samples = 50;  // K
  ReconMode mode = ReconMode::Proposed;
  double jinv_p = 0.3;  // probability of keeping the original pixel in the seed
  bool resample_seed_per_step = false;
  double eps_tv = 1e-6;
};

void validate(const TrainConfig& cfg);

struct LossTrace {
  std::vector<double> total, fidelity, tv;
};

struct TrainResult {
  WeightSet<float> weights;
  ImageGrid seed_image;  // frozen x0 used for training start and inference
  LossTrace trace;
};

struct ReconResult {
  ImageGrid mean_image;
  ImageGrid variance_map;
  std::vector<ImageGrid> samples;  // retained only on request
  LossTrace trace;
};

// J-invariant seed: x0 = b .* x + (1-b) .* s(x) with b ~ Bernoulli(p) and s a
// center-excluding 3x3 smoothing (kernel (1/6)[1/2 1 1/2; 1 0 1; 1/2 1 1/2],
// replicate padding).
ImageGrid jinv_seed(const ImageGrid& x_fbp, double p, uint64_t seed);

// Minimizes ||A f(x0; mu .* b) - y||^2 + alpha * TV(f) over mu with Adam,
// drawing a fresh mask every iteration (all-keep in DipTv mode). Aborts with
// a NumericalError naming the iteration and loss terms if the loss leaves
// the finite range.
TrainResult train(const Sinogram& y, const FanBeamGeometry& geom,
                  const GridShape& shape, const ImageGrid& x_fbp,
                  const NetworkSpec& spec, const TrainConfig& cfg,
                  int threads = 1);

// K-sample Monte-Carlo approximation of the conditional-mean estimate plus
// the per-pixel sample variance. In DipTv mode every sample is the same
// all-keep forward, so the result is exactly independent of K and the
// variance map is identically zero.
ReconResult mc_reconstruct(const WeightSet<float>& weights, const NetworkSpec& spec,
                           const ImageGrid& x0, int k_samples, uint64_t seed,
                           ReconMode mode, bool keep_samples = false);

struct PipelineResult {
  ReconResult recon;
  ImageGrid fbp_image;
  ImageGrid seed_image;
};

// FBP -> J-invariant seed -> training -> MC averaging, end to end.
PipelineResult reconstruct_pipeline(const Sinogram& y, const FanBeamGeometry& geom,
                                    const GridShape& shape, const NetworkSpec& spec,
                                    const TrainConfig& cfg, bool keep_samples = false,
                                    int threads = 1,
                                    FbpFilter fbp_filter = FbpFilter::Hann);

}  // namespace ldct
