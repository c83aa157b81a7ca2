#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ldct/gemm.hpp"
#include "ldct/projector.hpp"
#include "ldct/tensor.hpp"

namespace ldct {
namespace ops {

// ---------------------------------------------------------------------------
// Helpers

// PyTorch-style 'reflect' index (border pixel not repeated). Needs pad <= n-1.
inline int reflect_index(int p, int n) {
  if (p < 0) return -p;
  if (p >= n) return 2 * n - 2 - p;
  return p;
}

template <typename T>
void check_chw(const TensorPtr<T>& x, const char* who) {
  if (x->shape.size() != 3)
    throw std::invalid_argument(std::string(who) + ": expected (C,H,W) tensor");
}

// ---------------------------------------------------------------------------
// conv2d: cross-correlation with reflection padding, stride 1, no bias.
// x: (C,H,W), w: (OC,C,KH,KW). Output (OC, H+2p-KH+1, W+2p-KW+1).

template <typename T>
TensorPtr<T> conv2d(Tape<T>& tape, const TensorPtr<T>& x, const TensorPtr<T>& w,
                    int pad) {
  check_chw(x, "conv2d");
  if (w->shape.size() != 4) throw std::invalid_argument("conv2d: kernel must be 4-D");
  const int c = x->shape[0], h = x->shape[1], wd = x->shape[2];
  const int oc = w->shape[0], kc = w->shape[1], kh = w->shape[2], kw = w->shape[3];
  if (kc != c) throw std::invalid_argument("conv2d: channel mismatch");
  if (pad < 0) throw std::invalid_argument("conv2d: negative padding");
  if (pad > 0 && (pad > h - 1 || pad > wd - 1))
    throw std::invalid_argument("conv2d: reflection pad wider than input");
  const int hp = h + 2 * pad, wp = wd + 2 * pad;
  const int ho = hp - kh + 1, wo = wp - kw + 1;
  if (ho <= 0 || wo <= 0)
    throw std::invalid_argument("conv2d: kernel larger than padded input");

  // Padded copy, then im2col with one contiguous patch row per output pixel.
  auto xp = std::make_shared<std::vector<T>>(static_cast<size_t>(c) * hp * wp);
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < hp; ++i) {
      const int si = reflect_index(i - pad, h);
      const T* src = x->val.data() + (static_cast<size_t>(ch) * h + si) * wd;
      T* dst = xp->data() + (static_cast<size_t>(ch) * hp + i) * wp;
      for (int j = 0; j < wp; ++j) dst[j] = src[reflect_index(j - pad, wd)];
    }

  const size_t n_pos = static_cast<size_t>(ho) * wo;
  const size_t k_dim = static_cast<size_t>(c) * kh * kw;
  std::vector<T> col(n_pos * k_dim);
  auto fill_col = [&](const std::vector<T>& padded) {
    size_t r = 0;
    for (int oi = 0; oi < ho; ++oi)
      for (int oj = 0; oj < wo; ++oj, ++r) {
        T* row = col.data() + r * k_dim;
        size_t q = 0;
        for (int ch = 0; ch < c; ++ch)
          for (int ki = 0; ki < kh; ++ki) {
            const T* src =
                padded.data() + (static_cast<size_t>(ch) * hp + oi + ki) * wp + oj;
            for (int kj = 0; kj < kw; ++kj) row[q++] = src[kj];
          }
      }
  };
  fill_col(*xp);

  auto y = make_tensor<T>({oc, ho, wo});
  gemm<T>(false, true, oc, static_cast<int>(n_pos), static_cast<int>(k_dim),
          T(1), w->val.data(), col.data(), T(0), y->val.data());

  tape.push([x, w, y, xp, pad, c, h, wd, hp, wp, ho, wo, kh, kw, oc]() {
    const size_t n_pos = static_cast<size_t>(ho) * wo;
    const size_t k_dim = static_cast<size_t>(c) * kh * kw;
    // Rebuild the patch matrix from the saved padded input.
    std::vector<T> col(n_pos * k_dim);
    {
      size_t r = 0;
      for (int oi = 0; oi < ho; ++oi)
        for (int oj = 0; oj < wo; ++oj, ++r) {
          T* row = col.data() + r * k_dim;
          size_t q = 0;
          for (int ch = 0; ch < c; ++ch)
            for (int ki = 0; ki < kh; ++ki) {
              const T* src =
                  xp->data() + (static_cast<size_t>(ch) * hp + oi + ki) * wp + oj;
              for (int kj = 0; kj < kw; ++kj) row[q++] = src[kj];
            }
        }
    }
    gemm<T>(false, false, oc, static_cast<int>(k_dim), static_cast<int>(n_pos),
            T(1), y->grad.data(), col.data(), T(1), w->grad.data());

    std::vector<T> dcol(n_pos * k_dim);
    gemm<T>(true, false, static_cast<int>(n_pos), static_cast<int>(k_dim), oc,
            T(1), y->grad.data(), w->val.data(), T(0), dcol.data());

    std::vector<T> dxp(static_cast<size_t>(c) * hp * wp, T(0));
    size_t r = 0;
    for (int oi = 0; oi < ho; ++oi)
      for (int oj = 0; oj < wo; ++oj, ++r) {
        const T* row = dcol.data() + r * k_dim;
        size_t q = 0;
        for (int ch = 0; ch < c; ++ch)
          for (int ki = 0; ki < kh; ++ki) {
            T* dst = dxp.data() + (static_cast<size_t>(ch) * hp + oi + ki) * wp + oj;
            for (int kj = 0; kj < kw; ++kj) dst[kj] += row[q++];
          }
      }
    // Adjoint of the reflection pad: fold pad gradients onto source pixels.
    for (int ch = 0; ch < c; ++ch)
      for (int i = 0; i < hp; ++i) {
        const int si = reflect_index(i - pad, h);
        const T* src = dxp.data() + (static_cast<size_t>(ch) * hp + i) * wp;
        T* dst = x->grad.data() + (static_cast<size_t>(ch) * h + si) * wd;
        for (int j = 0; j < wp; ++j) dst[reflect_index(j - pad, wd)] += src[j];
      }
  });
  return y;
}

// ---------------------------------------------------------------------------
// leaky_relu

template <typename T>
TensorPtr<T> leaky_relu(Tape<T>& tape, const TensorPtr<T>& x, T slope) {
  auto y = make_tensor<T>(x->shape);
  for (size_t i = 0; i < x->val.size(); ++i) {
    const T v = x->val[i];
    y->val[i] = v >= T(0) ? v : slope * v;
  }
  tape.push([x, y, slope]() {
    for (size_t i = 0; i < x->val.size(); ++i)
      x->grad[i] += (x->val[i] >= T(0) ? T(1) : slope) * y->grad[i];
  });
  return y;
}

// ---------------------------------------------------------------------------
// maxpool2: 2x2, stride 2. Ties route to the first maximum in scan order.

template <typename T>
TensorPtr<T> maxpool2(Tape<T>& tape, const TensorPtr<T>& x) {
  check_chw(x, "maxpool2");
  const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
  if (h % 2 != 0 || w % 2 != 0)
    throw std::invalid_argument("maxpool2: spatial dims must be even");
  const int ho = h / 2, wo = w / 2;
  auto y = make_tensor<T>({c, ho, wo});
  auto argmax = std::make_shared<std::vector<uint32_t>>(y->numel());
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < ho; ++i)
      for (int j = 0; j < wo; ++j) {
        const size_t base = (static_cast<size_t>(ch) * h + 2 * i) * w + 2 * j;
        size_t best = base;
        T bv = x->val[base];
        const size_t cand[3] = {base + 1, base + w, base + w + 1};
        for (size_t k : cand)
          if (x->val[k] > bv) { bv = x->val[k]; best = k; }
        const size_t oi = (static_cast<size_t>(ch) * ho + i) * wo + j;
        y->val[oi] = bv;
        (*argmax)[oi] = static_cast<uint32_t>(best);
      }
  tape.push([x, y, argmax]() {
    for (size_t i = 0; i < y->val.size(); ++i)
      x->grad[(*argmax)[i]] += y->grad[i];
  });
  return y;
}

// ---------------------------------------------------------------------------
// bilinear_upsample2: 2x bilinear upsampling, align_corners = false.

namespace detail {
struct LerpTap {
  int i0, i1;
  double w0, w1;
};
inline LerpTap up2_tap(int dst, int n) {
  double src = (dst + 0.5) / 2.0 - 0.5;
  if (src < 0.0) src = 0.0;
  const int i0 = static_cast<int>(src);
  const int i1 = (i0 + 1 < n) ? i0 + 1 : i0;
  const double f = src - i0;
  return {i0, i1, 1.0 - f, f};
}
}  // namespace detail

template <typename T>
TensorPtr<T> bilinear_upsample2(Tape<T>& tape, const TensorPtr<T>& x) {
  check_chw(x, "bilinear_upsample2");
  const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
  const int ho = 2 * h, wo = 2 * w;
  auto y = make_tensor<T>({c, ho, wo});
  std::vector<detail::LerpTap> row_t(ho), col_t(wo);
  for (int i = 0; i < ho; ++i) row_t[i] = detail::up2_tap(i, h);
  for (int j = 0; j < wo; ++j) col_t[j] = detail::up2_tap(j, w);
  for (int ch = 0; ch < c; ++ch) {
    const T* src = x->val.data() + static_cast<size_t>(ch) * h * w;
    T* dst = y->val.data() + static_cast<size_t>(ch) * ho * wo;
    for (int i = 0; i < ho; ++i) {
      const auto& rt = row_t[i];
      for (int j = 0; j < wo; ++j) {
        const auto& ct = col_t[j];
        dst[static_cast<size_t>(i) * wo + j] =
            static_cast<T>(rt.w0 * (ct.w0 * src[static_cast<size_t>(rt.i0) * w + ct.i0] +
                                    ct.w1 * src[static_cast<size_t>(rt.i0) * w + ct.i1]) +
                           rt.w1 * (ct.w0 * src[static_cast<size_t>(rt.i1) * w + ct.i0] +
                                    ct.w1 * src[static_cast<size_t>(rt.i1) * w + ct.i1]));
      }
    }
  }
  tape.push([x, y, row_t, col_t, c, h, w, ho, wo]() {
    for (int ch = 0; ch < c; ++ch) {
      T* gx = x->grad.data() + static_cast<size_t>(ch) * h * w;
      const T* gy = y->grad.data() + static_cast<size_t>(ch) * ho * wo;
      for (int i = 0; i < ho; ++i) {
        const auto& rt = row_t[i];
        for (int j = 0; j < wo; ++j) {
          const auto& ct = col_t[j];
          const T g = gy[static_cast<size_t>(i) * wo + j];
          gx[static_cast<size_t>(rt.i0) * w + ct.i0] += static_cast<T>(rt.w0 * ct.w0) * g;
          gx[static_cast<size_t>(rt.i0) * w + ct.i1] += static_cast<T>(rt.w0 * ct.w1) * g;
          gx[static_cast<size_t>(rt.i1) * w + ct.i0] += static_cast<T>(rt.w1 * ct.w0) * g;
          gx[static_cast<size_t>(rt.i1) * w + ct.i1] += static_cast<T>(rt.w1 * ct.w1) * g;
        }
      }
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// batchnorm over spatial dims of a single instance (current statistics in
// every mode), affine gamma/beta per channel.

template <typename T>
TensorPtr<T> batchnorm(Tape<T>& tape, const TensorPtr<T>& x,
                       const TensorPtr<T>& gamma, const TensorPtr<T>& beta,
                       T eps = T(1e-5)) {
  check_chw(x, "batchnorm");
  const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
  const size_t n = static_cast<size_t>(h) * w;
  if (n == 0) throw std::invalid_argument("batchnorm: empty spatial extent");
  if (gamma->numel() != static_cast<size_t>(c) || beta->numel() != static_cast<size_t>(c))
    throw std::invalid_argument("batchnorm: affine parameter size mismatch");

  auto y = make_tensor<T>(x->shape);
  auto xhat = std::make_shared<std::vector<T>>(x->numel());
  auto invstd = std::make_shared<std::vector<T>>(c);
  for (int ch = 0; ch < c; ++ch) {
    const T* xv = x->val.data() + static_cast<size_t>(ch) * n;
    T mean = T(0);
    for (size_t i = 0; i < n; ++i) mean += xv[i];
    mean /= static_cast<T>(n);
    T var = T(0);
    for (size_t i = 0; i < n; ++i) { const T d = xv[i] - mean; var += d * d; }
    var /= static_cast<T>(n);
    const T inv = T(1) / std::sqrt(var + eps);
    (*invstd)[ch] = inv;
    T* xh = xhat->data() + static_cast<size_t>(ch) * n;
    T* yv = y->val.data() + static_cast<size_t>(ch) * n;
    const T g = gamma->val[ch], b = beta->val[ch];
    for (size_t i = 0; i < n; ++i) {
      xh[i] = (xv[i] - mean) * inv;
      yv[i] = g * xh[i] + b;
    }
  }
  tape.push([x, gamma, beta, y, xhat, invstd, c, n]() {
    for (int ch = 0; ch < c; ++ch) {
      const T* gy = y->grad.data() + static_cast<size_t>(ch) * n;
      const T* xh = xhat->data() + static_cast<size_t>(ch) * n;
      T sum_gy = T(0), sum_gy_xh = T(0);
      for (size_t i = 0; i < n; ++i) {
        sum_gy += gy[i];
        sum_gy_xh += gy[i] * xh[i];
      }
      gamma->grad[ch] += sum_gy_xh;
      beta->grad[ch] += sum_gy;
      const T scale = gamma->val[ch] * (*invstd)[ch];
      const T mean_gy = sum_gy / static_cast<T>(n);
      const T mean_gy_xh = sum_gy_xh / static_cast<T>(n);
      T* gx = x->grad.data() + static_cast<size_t>(ch) * n;
      for (size_t i = 0; i < n; ++i)
        gx[i] += scale * (gy[i] - mean_gy - xh[i] * mean_gy_xh);
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// dropout with inverted scaling: y = x .* mask / keep_prob.

template <typename T>
TensorPtr<T> dropout(Tape<T>& tape, const TensorPtr<T>& x,
                     const std::shared_ptr<std::vector<uint8_t>>& mask,
                     double keep_prob) {
  if (keep_prob <= 0.0) throw std::invalid_argument("dropout: keep_prob must be > 0");
  if (mask->size() != x->numel())
    throw std::invalid_argument("dropout: mask size mismatch");
  const T inv = static_cast<T>(1.0 / keep_prob);
  auto y = make_tensor<T>(x->shape);
  for (size_t i = 0; i < x->val.size(); ++i)
    y->val[i] = (*mask)[i] ? x->val[i] * inv : T(0);
  tape.push([x, y, mask, inv]() {
    for (size_t i = 0; i < x->val.size(); ++i)
      if ((*mask)[i]) x->grad[i] += inv * y->grad[i];
  });
  return y;
}

// ---------------------------------------------------------------------------
// Channel concatenation (skip connections).

template <typename T>
TensorPtr<T> concat_ch(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  check_chw(a, "concat_ch");
  check_chw(b, "concat_ch");
  if (a->shape[1] != b->shape[1] || a->shape[2] != b->shape[2])
    throw std::invalid_argument("concat_ch: spatial dims differ");
  auto y = make_tensor<T>({a->shape[0] + b->shape[0], a->shape[1], a->shape[2]});
  std::copy(a->val.begin(), a->val.end(), y->val.begin());
  std::copy(b->val.begin(), b->val.end(), y->val.begin() + a->val.size());
  tape.push([a, b, y]() {
    for (size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += y->grad[i];
    for (size_t i = 0; i < b->grad.size(); ++i) b->grad[i] += y->grad[a->grad.size() + i];
  });
  return y;
}

// ---------------------------------------------------------------------------
// Smoothed anisotropic total variation (Charbonnier):
//   sum sqrt(Dh^2 + eps^2) + sqrt(Dv^2 + eps^2) - 2*eps*count
// with forward differences and replicate boundary.

template <typename T>
TensorPtr<T> tv_l1(Tape<T>& tape, const TensorPtr<T>& x, T eps_tv) {
  check_chw(x, "tv_l1");
  if (!(eps_tv > T(0))) throw std::invalid_argument("tv_l1: eps_tv must be > 0");
  const int c = x->shape[0], h = x->shape[1], w = x->shape[2];
  auto y = make_tensor<T>(std::vector<int>{1});
  double acc = 0.0;
  const double e2 = static_cast<double>(eps_tv) * static_cast<double>(eps_tv);
  for (int ch = 0; ch < c; ++ch) {
    const T* xv = x->val.data() + static_cast<size_t>(ch) * h * w;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        const size_t p = static_cast<size_t>(i) * w + j;
        if (j + 1 < w) {
          const double d = static_cast<double>(xv[p + 1]) - xv[p];
          acc += std::sqrt(d * d + e2) - static_cast<double>(eps_tv);
        }
        if (i + 1 < h) {
          const double d = static_cast<double>(xv[p + w]) - xv[p];
          acc += std::sqrt(d * d + e2) - static_cast<double>(eps_tv);
        }
      }
  }
  y->val[0] = static_cast<T>(acc);
  tape.push([x, y, eps_tv, c, h, w]() {
    const T g = y->grad[0];
    const double e2 = static_cast<double>(eps_tv) * static_cast<double>(eps_tv);
    for (int ch = 0; ch < c; ++ch) {
      const T* xv = x->val.data() + static_cast<size_t>(ch) * h * w;
      T* gx = x->grad.data() + static_cast<size_t>(ch) * h * w;
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          const size_t p = static_cast<size_t>(i) * w + j;
          if (j + 1 < w) {
            const double d = static_cast<double>(xv[p + 1]) - xv[p];
            const T t = static_cast<T>(d / std::sqrt(d * d + e2)) * g;
            gx[p + 1] += t;
            gx[p] -= t;
          }
          if (i + 1 < h) {
            const double d = static_cast<double>(xv[p + w]) - xv[p];
            const T t = static_cast<T>(d / std::sqrt(d * d + e2)) * g;
            gx[p + w] += t;
            gx[p] -= t;
          }
        }
    }
  });
  return y;
}

// ---------------------------------------------------------------------------
// data_fidelity: || A x - y ||^2 through a matrix-free linear operator.
// The operator works in double regardless of the tape scalar type; the
// backward pass is 2 A'(Ax - y).

template <typename T>
TensorPtr<T> data_fidelity(Tape<T>& tape, const TensorPtr<T>& x,
                           const std::vector<double>& y, const LinearOperator& op) {
  check_chw(x, "data_fidelity");
  if (op.domain_size() != x->numel())
    throw std::invalid_argument("data_fidelity: operator domain != image size");
  if (op.range_size() != y.size())
    throw std::invalid_argument("data_fidelity: operator range != data size");

  auto residual = std::make_shared<std::vector<double>>(y.size());
  {
    std::vector<double> xd(x->val.begin(), x->val.end());
    op.apply(xd.data(), residual->data());
    for (size_t i = 0; i < y.size(); ++i) (*residual)[i] -= y[i];
  }
  double acc = 0.0;
  for (double r : *residual) acc += r * r;
  auto loss = make_tensor<T>(std::vector<int>{1});
  loss->val[0] = static_cast<T>(acc);

  tape.push([x, loss, residual, &op]() {
    const double g = static_cast<double>(loss->grad[0]);
    std::vector<double> grad_img(op.domain_size());
    op.apply_adjoint(residual->data(), grad_img.data());
    for (size_t i = 0; i < grad_img.size(); ++i)
      x->grad[i] += static_cast<T>(2.0 * g * grad_img[i]);
  });
  return loss;
}

// ---------------------------------------------------------------------------
// Scalar arithmetic for composing losses.

template <typename T>
TensorPtr<T> add(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->numel() != 1 || b->numel() != 1)
    throw std::invalid_argument("add: scalar tensors only");
  auto y = make_tensor<T>(std::vector<int>{1});
  y->val[0] = a->val[0] + b->val[0];
  tape.push([a, b, y]() {
    a->grad[0] += y->grad[0];
    b->grad[0] += y->grad[0];
  });
  return y;
}

template <typename T>
TensorPtr<T> scale(Tape<T>& tape, const TensorPtr<T>& a, T factor) {
  if (a->numel() != 1) throw std::invalid_argument("scale: scalar tensors only");
  auto y = make_tensor<T>(std::vector<int>{1});
  y->val[0] = factor * a->val[0];
  tape.push([a, y, factor]() { a->grad[0] += factor * y->grad[0]; });
  return y;
}

}  // namespace ops
}  // namespace ldct
