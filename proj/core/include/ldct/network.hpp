#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ldct/ops.hpp"
#include "ldct/rng.hpp"
#include "ldct/tensor.hpp"

namespace ldct {

// Encoder-decoder with skip connections. Depth-i encoder blocks D_i are
// [drop, conv(k_d), maxpool, BN, lrelu] + [drop, conv(k_d), BN, lrelu]; skip
// blocks S_i are [drop, conv(k_s), lrelu] taps on the D_i inputs; decoder
// blocks U_i are [BN, drop, conv(k_u), BN, lrelu, drop, conv(k_u2), BN,
// lrelu, upsample], with the deepest feature map upsampled once before U_N
// and no upsample in U_1. U_1's second conv maps to one output channel with
// no trailing nonlinearity.
struct NetworkSpec {
  int depth = 5;             // N
  int filters_down = 128;    // c_d
  int filters_up = 128;      // c_u
  int filters_skip = 4;      // c_s
  int kernel_down = 3;       // k_d
  int kernel_up = 3;         // k_u
  int kernel_skip = 1;       // k_s
  int kernel_up_second = 1;  // second decoder conv; 1 follows the block diagram
  double drop_down = 0.0;    // p_d
  double drop_up = 0.0;      // p_u
  double drop_skip = 0.3;    // p_s
  double leaky_slope = 0.1;
};

void validate(const NetworkSpec& spec);

// Input spatial dims must be divisible by this for the pooling ladder.
int spatial_divisor(const NetworkSpec& spec);

template <typename T>
struct WeightSet {
  std::vector<std::pair<std::string, TensorPtr<T>>> params;

  std::vector<TensorPtr<T>> tensors() const {
    std::vector<TensorPtr<T>> out;
    out.reserve(params.size());
    for (const auto& [name, t] : params) out.push_back(t);
    return out;
  }
  const TensorPtr<T>& at(const std::string& name) const {
    for (const auto& [n, t] : params)
      if (n == name) return t;
    throw std::invalid_argument("WeightSet: no parameter named " + name);
  }
  void zero_grads() const {
    for (const auto& [n, t] : params) t->zero_grad();
  }
  size_t parameter_count() const {
    size_t n = 0;
    for (const auto& [name, t] : params) n += t->numel();
    return n;
  }
};

// One Bernoulli mask per stochastic dropout site (drop probability > 0),
// in forward execution order. No sites = the all-keep forward pass.
struct DropoutMask {
  struct Site {
    std::string name;
    std::vector<int> shape;
    double keep_prob;
    std::shared_ptr<std::vector<uint8_t>> mask;
  };
  std::vector<Site> sites;

  bool all_keep() const { return sites.empty(); }
};

struct MaskSite {
  std::string name;
  std::vector<int> shape;
  double drop_prob;
};

// Stochastic dropout sites for the given spec and input size.
std::vector<MaskSite> mask_layout(const NetworkSpec& spec, int height, int width);

// Element-wise Bernoulli masks, deterministic per (seed, draw_index).
DropoutMask sample_mask(const NetworkSpec& spec, int height, int width,
                        uint64_t seed, uint64_t draw_index);

// He-initialized weights (LeakyReLU gain), deterministic per seed.
template <typename T>
WeightSet<T> build_network(const NetworkSpec& spec, uint64_t seed);

// Runs the network on a (1,H,W) input. Pass nullptr (or an empty mask) for
// the deterministic all-keep path used by the DIP mode.
template <typename T>
TensorPtr<T> forward(Tape<T>& tape, const WeightSet<T>& weights,
                     const NetworkSpec& spec, const TensorPtr<T>& x0,
                     const DropoutMask* mask);

// ---------------------------------------------------------------------------
// Implementation

inline void validate(const NetworkSpec& s) {
  auto odd_pos = [](int k) { return k >= 1 && k % 2 == 1; };
  if (s.depth < 1) throw std::invalid_argument("NetworkSpec: depth must be >= 1");
  if (s.filters_down < 1 || s.filters_up < 1 || s.filters_skip < 1)
    throw std::invalid_argument("NetworkSpec: filter counts must be >= 1");
  if (!odd_pos(s.kernel_down) || !odd_pos(s.kernel_up) || !odd_pos(s.kernel_skip) ||
      !odd_pos(s.kernel_up_second))
    throw std::invalid_argument("NetworkSpec: kernels must be odd and positive");
  for (double p : {s.drop_down, s.drop_up, s.drop_skip})
    if (!(p >= 0.0 && p < 1.0))
      throw std::invalid_argument("NetworkSpec: dropout probabilities must be in [0,1)");
  if (!(s.leaky_slope >= 0.0))
    throw std::invalid_argument("NetworkSpec: leaky slope must be >= 0");
}

inline int spatial_divisor(const NetworkSpec& spec) { return 1 << spec.depth; }

namespace netdetail {

inline int enc_in_channels(const NetworkSpec& s, int level) {
  return level == 1 ? 1 : s.filters_down;
}

inline int dec_in_channels(const NetworkSpec& s, int level) {
  return s.filters_skip + (level == s.depth ? s.filters_down : s.filters_up);
}

template <typename T>
TensorPtr<T> he_kernel(CounterRng& rng, int oc, int ic, int kh, int kw,
                       double slope) {
  auto t = make_tensor<T>({oc, ic, kh, kw});
  const double fan_in = static_cast<double>(ic) * kh * kw;
  const double std = std::sqrt(2.0 / ((1.0 + slope * slope) * fan_in));
  for (auto& v : t->val) v = static_cast<T>(std * rng.gaussian());
  return t;
}

template <typename T>
void push_bn(WeightSet<T>& ws, const std::string& prefix, int channels) {
  auto gamma = make_tensor<T>({channels});
  std::fill(gamma->val.begin(), gamma->val.end(), T(1));
  ws.params.emplace_back(prefix + ".gamma", gamma);
  ws.params.emplace_back(prefix + ".beta", make_tensor<T>({channels}));
}

}  // namespace netdetail

template <typename T>
WeightSet<T> build_network(const NetworkSpec& spec, uint64_t seed) {
  validate(spec);
  using namespace netdetail;
  WeightSet<T> ws;
  CounterRng rng(seed, 0x6e657477ULL);  // weight stream
  const int n = spec.depth;
  for (int i = 1; i <= n; ++i) {
    const std::string p = "d" + std::to_string(i);
    ws.params.emplace_back(p + ".conv1.w",
                           he_kernel<T>(rng, spec.filters_down, enc_in_channels(spec, i),
                                        spec.kernel_down, spec.kernel_down,
                                        spec.leaky_slope));
    push_bn(ws, p + ".bn1", spec.filters_down);
    ws.params.emplace_back(p + ".conv2.w",
                           he_kernel<T>(rng, spec.filters_down, spec.filters_down,
                                        spec.kernel_down, spec.kernel_down,
                                        spec.leaky_slope));
    push_bn(ws, p + ".bn2", spec.filters_down);
  }
  for (int i = 1; i <= n; ++i) {
    ws.params.emplace_back("s" + std::to_string(i) + ".conv.w",
                           he_kernel<T>(rng, spec.filters_skip, enc_in_channels(spec, i),
                                        spec.kernel_skip, spec.kernel_skip,
                                        spec.leaky_slope));
  }
  for (int i = n; i >= 1; --i) {
    const std::string p = "u" + std::to_string(i);
    const int in_ch = dec_in_channels(spec, i);
    push_bn(ws, p + ".bn0", in_ch);
    ws.params.emplace_back(p + ".conv1.w",
                           he_kernel<T>(rng, spec.filters_up, in_ch, spec.kernel_up,
                                        spec.kernel_up, spec.leaky_slope));
    push_bn(ws, p + ".bn1", spec.filters_up);
    const int out_ch = (i == 1) ? 1 : spec.filters_up;
    ws.params.emplace_back(p + ".conv2.w",
                           he_kernel<T>(rng, out_ch, spec.filters_up,
                                        spec.kernel_up_second, spec.kernel_up_second,
                                        spec.leaky_slope));
    if (i > 1) push_bn(ws, p + ".bn2", spec.filters_up);
  }
  return ws;
}

inline std::vector<MaskSite> mask_layout(const NetworkSpec& spec, int height,
                                         int width) {
  validate(spec);
  if (height % spatial_divisor(spec) != 0 || width % spatial_divisor(spec) != 0)
    throw std::invalid_argument("mask_layout: input dims must be divisible by 2^depth");
  using namespace netdetail;
  std::vector<MaskSite> sites;
  const int n = spec.depth;
  auto at_scale = [&](int s) {
    return std::pair<int, int>{height >> s, width >> s};
  };
  for (int i = 1; i <= n; ++i) {
    if (spec.drop_down > 0.0) {
      auto [h0, w0] = at_scale(i - 1);
      sites.push_back({"d" + std::to_string(i) + ".drop1",
                       {enc_in_channels(spec, i), h0, w0}, spec.drop_down});
      auto [h1, w1] = at_scale(i);
      sites.push_back({"d" + std::to_string(i) + ".drop2",
                       {spec.filters_down, h1, w1}, spec.drop_down});
    }
    if (spec.drop_skip > 0.0) {
      auto [h0, w0] = at_scale(i - 1);
      sites.push_back({"s" + std::to_string(i) + ".drop",
                       {enc_in_channels(spec, i), h0, w0}, spec.drop_skip});
    }
  }
  if (spec.drop_up > 0.0) {
    for (int i = n; i >= 1; --i) {
      auto [h, w] = at_scale(i - 1);
      sites.push_back({"u" + std::to_string(i) + ".drop1",
                       {dec_in_channels(spec, i), h, w}, spec.drop_up});
      sites.push_back({"u" + std::to_string(i) + ".drop2",
                       {spec.filters_up, h, w}, spec.drop_up});
    }
  }
  return sites;
}

inline DropoutMask sample_mask(const NetworkSpec& spec, int height, int width,
                               uint64_t seed, uint64_t draw_index) {
  DropoutMask out;
  const auto layout = mask_layout(spec, height, width);
  for (size_t s = 0; s < layout.size(); ++s) {
    const auto& site = layout[s];
    size_t n = 1;
    for (int d : site.shape) n *= static_cast<size_t>(d);
    auto mask = std::make_shared<std::vector<uint8_t>>(n);
    CounterRng rng(seed ^ mix64(draw_index), 0x6d61736bULL, s);
    for (size_t i = 0; i < n; ++i)
      (*mask)[i] = rng.uniform() >= site.drop_prob ? 1 : 0;
    out.sites.push_back({site.name, site.shape, 1.0 - site.drop_prob, mask});
  }
  return out;
}

namespace netdetail {

// Applies the mask registered for `name`, or the identity when the site is
// absent (drop probability zero or all-keep inference).
template <typename T>
TensorPtr<T> maybe_drop(Tape<T>& tape, const TensorPtr<T>& x,
                        const DropoutMask* mask, const std::string& name) {
  if (mask == nullptr || mask->all_keep()) return x;
  for (const auto& site : mask->sites) {
    if (site.name != name) continue;
    if (static_cast<size_t>(site.shape[0]) * site.shape[1] * site.shape[2] != x->numel())
      throw std::invalid_argument("forward: dropout mask shape mismatch at " + name);
    return ops::dropout(tape, x, site.mask, site.keep_prob);
  }
  return x;
}

}  // namespace netdetail

template <typename T>
TensorPtr<T> forward(Tape<T>& tape, const WeightSet<T>& weights,
                     const NetworkSpec& spec, const TensorPtr<T>& x0,
                     const DropoutMask* mask) {
  validate(spec);
  using namespace netdetail;
  ops::check_chw(x0, "network forward");
  if (x0->shape[0] != 1)
    throw std::invalid_argument("forward: expected single-channel input");
  if (x0->shape[1] % spatial_divisor(spec) != 0 ||
      x0->shape[2] % spatial_divisor(spec) != 0)
    throw std::invalid_argument("forward: input dims must be divisible by 2^depth");

  const int n = spec.depth;
  const T slope = static_cast<T>(spec.leaky_slope);
  const int pad_d = (spec.kernel_down - 1) / 2;
  const int pad_u = (spec.kernel_up - 1) / 2;
  const int pad_u2 = (spec.kernel_up_second - 1) / 2;
  const int pad_s = (spec.kernel_skip - 1) / 2;

  // Encoder; enc_in[i] is the input of D_{i+1} (and the tap of S_{i+1}).
  std::vector<TensorPtr<T>> enc_in;
  TensorPtr<T> cur = x0;
  for (int i = 1; i <= n; ++i) {
    enc_in.push_back(cur);
    const std::string p = "d" + std::to_string(i);
    auto t = maybe_drop(tape, cur, mask, p + ".drop1");
    t = ops::conv2d(tape, t, weights.at(p + ".conv1.w"), pad_d);
    t = ops::maxpool2(tape, t);
    t = ops::batchnorm(tape, t, weights.at(p + ".bn1.gamma"), weights.at(p + ".bn1.beta"));
    t = ops::leaky_relu(tape, t, slope);
    t = maybe_drop(tape, t, mask, p + ".drop2");
    t = ops::conv2d(tape, t, weights.at(p + ".conv2.w"), pad_d);
    t = ops::batchnorm(tape, t, weights.at(p + ".bn2.gamma"), weights.at(p + ".bn2.beta"));
    t = ops::leaky_relu(tape, t, slope);
    cur = t;
  }

  // Deepest feature map back up one scale, then decode with skip concats.
  cur = ops::bilinear_upsample2(tape, cur);
  for (int i = n; i >= 1; --i) {
    const std::string sp = "s" + std::to_string(i);
    auto s = maybe_drop(tape, enc_in[i - 1], mask, sp + ".drop");
    s = ops::conv2d(tape, s, weights.at(sp + ".conv.w"), pad_s);
    s = ops::leaky_relu(tape, s, slope);

    const std::string p = "u" + std::to_string(i);
    auto t = ops::concat_ch(tape, s, cur);
    t = ops::batchnorm(tape, t, weights.at(p + ".bn0.gamma"), weights.at(p + ".bn0.beta"));
    t = maybe_drop(tape, t, mask, p + ".drop1");
    t = ops::conv2d(tape, t, weights.at(p + ".conv1.w"), pad_u);
    t = ops::batchnorm(tape, t, weights.at(p + ".bn1.gamma"), weights.at(p + ".bn1.beta"));
    t = ops::leaky_relu(tape, t, slope);
    t = maybe_drop(tape, t, mask, p + ".drop2");
    t = ops::conv2d(tape, t, weights.at(p + ".conv2.w"), pad_u2);
    if (i > 1) {
      t = ops::batchnorm(tape, t, weights.at(p + ".bn2.gamma"), weights.at(p + ".bn2.beta"));
      t = ops::leaky_relu(tape, t, slope);
      t = ops::bilinear_upsample2(tape, t);
    }
    cur = t;
  }
  return cur;
}

}  // namespace ldct
