#include "ldct/bayes.hpp"

#include <cmath>
#include <cstdio>

#include "ldct/adam.hpp"
#include "ldct/ops.hpp"
#include "ldct/projector.hpp"
#include "ldct/rng.hpp"

namespace ldct {

namespace {

constexpr uint64_t kJinvDomain = 0x6a696e76ULL;
constexpr uint64_t kTrainMaskDomain = 0x746d736bULL;
constexpr uint64_t kInferMaskDomain = 0x696d736bULL;

TensorPtr<float> image_to_tensor(const ImageGrid& img) {
  auto t = make_tensor<float>({1, img.height, img.width});
  for (size_t i = 0; i < img.values.size(); ++i)
    t->val[i] = static_cast<float>(img.values[i]);
  return t;
}

ImageGrid tensor_to_image(const TensorPtr<float>& t, double pixel_size_mm) {
  ImageGrid img(t->shape[2], t->shape[1], pixel_size_mm);
  for (size_t i = 0; i < img.values.size(); ++i)
    img.values[i] = static_cast<double>(t->val[i]);
  return img;
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.alpha < 0) throw ConfigError("TrainConfig: alpha must be >= 0");
  if (cfg.iterations < 1) throw ConfigError("TrainConfig: iterations must be >= 1");
  if (cfg.mc_samples < 1) throw ConfigError("TrainConfig: K must be >= 1");
  if (!(cfg.lr > 0)) throw ConfigError("TrainConfig: lr must be > 0");
  if (!(cfg.jinv_p >= 0.0 && cfg.jinv_p <= 1.0))
    throw ConfigError("TrainConfig: jinv_p must be in [0,1]");
  if (!(cfg.eps_tv > 0)) throw ConfigError("TrainConfig: eps_tv must be > 0");
}

ImageGrid jinv_seed(const ImageGrid& x_fbp, double p, uint64_t seed) {
  validate(x_fbp);
  const int h = x_fbp.height, w = x_fbp.width;
  // Center-excluding smoothing; weights sum to one.
  static const double kKernel[3][3] = {
      {0.5 / 6.0, 1.0 / 6.0, 0.5 / 6.0},
      {1.0 / 6.0, 0.0, 1.0 / 6.0},
      {0.5 / 6.0, 1.0 / 6.0, 0.5 / 6.0},
  };
  ImageGrid out(w, h, x_fbp.pixel_size_mm);
  CounterRng rng(seed, kJinvDomain);
  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double s = 0.0;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          s += kKernel[di + 1][dj + 1] *
               x_fbp.at(clampi(i + di, 0, h - 1), clampi(j + dj, 0, w - 1));
      const bool keep = rng.uniform() < p;
      out.at(i, j) = keep ? x_fbp.at(i, j) : s;
    }
  }
  return out;
}

TrainResult train(const Sinogram& y, const FanBeamGeometry& geom,
                  const GridShape& shape, const ImageGrid& x_fbp,
                  const NetworkSpec& spec, const TrainConfig& cfg, int threads) {
  validate(cfg);
  validate(spec);
  validate(y, geom);

  ImageGrid x0 = jinv_seed(x_fbp, cfg.jinv_p, cfg.seed);
  TensorPtr<float> x0_t = image_to_tensor(x0);

  WeightSet<float> weights = build_network<float>(spec, cfg.seed);
  auto params = weights.tensors();
  AdamState<float> state(params);
  ProjectorOperator op(geom, shape, threads);

  LossTrace trace;
  trace.total.reserve(cfg.iterations);
  trace.fidelity.reserve(cfg.iterations);
  trace.tv.reserve(cfg.iterations);

  for (int it = 0; it < cfg.iterations; ++it) {
    Tape<float> tape;
    TensorPtr<float> input = x0_t;
    if (cfg.resample_seed_per_step && it > 0)
      input = image_to_tensor(jinv_seed(x_fbp, cfg.jinv_p, cfg.seed + 1 + it));

    DropoutMask mask;
    const DropoutMask* mask_ptr = nullptr;
    if (cfg.mode == ReconMode::Proposed) {
      mask = sample_mask(spec, shape.height, shape.width,
                         cfg.seed ^ mix64(kTrainMaskDomain), static_cast<uint64_t>(it));
      mask_ptr = &mask;
    }

    auto out = forward(tape, weights, spec, input, mask_ptr);
    auto fid = ops::data_fidelity(tape, out, y.values, op);
    auto tv = ops::tv_l1(tape, out, static_cast<float>(cfg.eps_tv));
    auto total = ops::add(tape, fid, ops::scale(tape, tv, static_cast<float>(cfg.alpha)));

    const double fid_v = fid->val[0], tv_v = tv->val[0], total_v = total->val[0];
    if (!std::isfinite(total_v)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "training diverged at iteration %d: fidelity=%g tv=%g total=%g",
                    it, fid_v, tv_v, total_v);
      throw NumericalError(buf);
    }
    trace.fidelity.push_back(fid_v);
    trace.tv.push_back(tv_v);
    trace.total.push_back(total_v);

    weights.zero_grads();
    tape.backward(total);
    adam_step<float>(params, state, static_cast<float>(cfg.lr),
                     static_cast<float>(cfg.beta1), static_cast<float>(cfg.beta2));
  }
  return TrainResult{std::move(weights), std::move(x0), std::move(trace)};
}

ReconResult mc_reconstruct(const WeightSet<float>& weights, const NetworkSpec& spec,
                           const ImageGrid& x0, int k_samples, uint64_t seed,
                           ReconMode mode, bool keep_samples) {
  if (k_samples < 1) throw ConfigError("mc_reconstruct: K must be >= 1");
  validate(x0);
  TensorPtr<float> x0_t = image_to_tensor(x0);

  ReconResult res;
  if (mode == ReconMode::DipTv) {
    // All K samples coincide with the all-keep forward; compute it once so
    // the result is exactly independent of K.
    Tape<float> tape;
    auto out = forward(tape, weights, spec, x0_t, nullptr);
    res.mean_image = tensor_to_image(out, x0.pixel_size_mm);
    res.variance_map = ImageGrid(x0.width, x0.height, x0.pixel_size_mm);
    if (keep_samples)
      res.samples.assign(static_cast<size_t>(k_samples), res.mean_image);
    return res;
  }

  std::vector<ImageGrid> samples;
  samples.reserve(k_samples);
  for (int k = 0; k < k_samples; ++k) {
    Tape<float> tape;
    DropoutMask mask = sample_mask(spec, x0.height, x0.width,
                                   seed ^ mix64(kInferMaskDomain),
                                   static_cast<uint64_t>(k));
    auto out = forward(tape, weights, spec, x0_t, &mask);
    samples.push_back(tensor_to_image(out, x0.pixel_size_mm));
  }

  ImageGrid mean(x0.width, x0.height, x0.pixel_size_mm);
  for (const auto& s : samples)
    for (size_t i = 0; i < mean.values.size(); ++i) mean.values[i] += s.values[i];
  for (auto& v : mean.values) v /= k_samples;

  ImageGrid var(x0.width, x0.height, x0.pixel_size_mm);
  if (k_samples > 1) {
    for (const auto& s : samples)
      for (size_t i = 0; i < var.values.size(); ++i) {
        const double d = s.values[i] - mean.values[i];
        var.values[i] += d * d;
      }
    for (auto& v : var.values) v /= (k_samples - 1);
  }

  res.mean_image = std::move(mean);
  res.variance_map = std::move(var);
  if (keep_samples) res.samples = std::move(samples);
  return res;
}

PipelineResult reconstruct_pipeline(const Sinogram& y, const FanBeamGeometry& geom,
                                    const GridShape& shape, const NetworkSpec& spec,
                                    const TrainConfig& cfg, bool keep_samples,
                                    int threads, FbpFilter fbp_filter) {
  ImageGrid x_fbp = fbp_reconstruct(y, geom, shape, fbp_filter, threads);
  TrainResult tr = train(y, geom, shape, x_fbp, spec, cfg, threads);
  ReconResult rr = mc_reconstruct(tr.weights, spec, tr.seed_image, cfg.mc_samples,
                                  cfg.seed, cfg.mode, keep_samples);
  rr.trace = std::move(tr.trace);
  return PipelineResult{std::move(rr), std::move(x_fbp), std::move(tr.seed_image)};
}

}  // namespace ldct
