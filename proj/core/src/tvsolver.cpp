#include "ldct/tvsolver.hpp"

#include <cmath>
#include <cstdio>

#include "ldct/fbp.hpp"

namespace ldct {

void validate(const AdmmConfig& cfg) {
  if (!(cfg.rho > 0)) throw ConfigError("AdmmConfig: rho must be > 0");
  if (cfg.alpha < 0) throw ConfigError("AdmmConfig: alpha must be >= 0");
  if (cfg.outer_iters < 1 || cfg.cg_iters < 1)
    throw ConfigError("AdmmConfig: iteration counts must be >= 1");
}

void grad_op(const double* x, int width, int height, double* out) {
  const size_t n = static_cast<size_t>(width) * height;
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      const size_t p = static_cast<size_t>(i) * width + j;
      out[p] = (j + 1 < width) ? x[p + 1] - x[p] : 0.0;
      out[n + p] = (i + 1 < height) ? x[p + width] - x[p] : 0.0;
    }
}

void div_op(const double* z, int width, int height, double* out) {
  const size_t n = static_cast<size_t>(width) * height;
  for (size_t p = 0; p < n; ++p) out[p] = 0.0;
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      const size_t p = static_cast<size_t>(i) * width + j;
      if (j + 1 < width) {
        out[p] -= z[p];
        out[p + 1] += z[p];
      }
      if (i + 1 < height) {
        out[p] -= z[n + p];
        out[p + width] += z[n + p];
      }
    }
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

AdmmResult pwls_tv_admm(const Sinogram& y, const FanBeamGeometry& geom,
                        const GridShape& shape, const AdmmConfig& cfg,
                        int threads) {
  validate(cfg);
  validate(geom);
  validate(y, geom);

  const int w = shape.width, h = shape.height;
  const size_t n = static_cast<size_t>(w) * h;
  const size_t m = y.values.size();
  const size_t gn = 2 * n;
  ProjectorOperator op(geom, shape, threads);

  std::vector<double> x(n, 0.0);
  if (cfg.warm_start_fbp) {
    ImageGrid f = fbp_reconstruct(y, geom, shape, FbpFilter::Hann, threads);
    x = f.values;
  }
  std::vector<double> z(gn, 0.0), u(gn, 0.0), gx(gn), tmp_img(n), tmp_sino(m);
  grad_op(x.data(), w, h, z.data());

  double rho = cfg.rho;
  std::vector<double> aty(n);
  op.apply_adjoint(y.values.data(), aty.data());

  // M v = A'A v + (rho/2) grad' grad v
  auto apply_m = [&](const std::vector<double>& v, std::vector<double>& out) {
    op.apply(v.data(), tmp_sino.data());
    op.apply_adjoint(tmp_sino.data(), out.data());
    grad_op(v.data(), w, h, gx.data());
    div_op(gx.data(), w, h, tmp_img.data());
    for (size_t i = 0; i < n; ++i) out[i] -= 0.5 * rho * tmp_img[i];
  };

  auto objective = [&](const std::vector<double>& v) {
    op.apply(v.data(), tmp_sino.data());
    double fid = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const double r = tmp_sino[i] - y.values[i];
      fid += r * r;
    }
    grad_op(v.data(), w, h, gx.data());
    double tv = 0.0;
    for (size_t i = 0; i < gn; ++i) tv += std::fabs(gx[i]);
    return fid + cfg.alpha * tv;
  };

  AdmmResult res;
  std::vector<double> rhs(n), r(n), p(n), mp(n);

  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    // x-update by CG on (A'A + (rho/2) grad'grad) x = A'y + (rho/2) grad'(z-u)
    for (size_t i = 0; i < gn; ++i) gx[i] = z[i] - u[i];
    div_op(gx.data(), w, h, tmp_img.data());
    for (size_t i = 0; i < n; ++i) rhs[i] = aty[i] - 0.5 * rho * tmp_img[i];

    apply_m(x, mp);
    for (size_t i = 0; i < n; ++i) r[i] = rhs[i] - mp[i];
    p = r;
    double rs = dot(r, r);
    const double rhs_norm = norm2(rhs);
    const double tol = cfg.cg_tol * std::max(rhs_norm, 1e-300);
    for (int it = 0; it < cfg.cg_iters && std::sqrt(rs) > tol; ++it) {
      apply_m(p, mp);
      const double curvature = dot(p, mp);
      if (!(curvature > 1e-300)) {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "pwls_tv_admm: CG breakdown at outer %d, curvature=%g",
                      outer, curvature);
        throw NumericalError(buf);
      }
      const double a = rs / curvature;
      for (size_t i = 0; i < n; ++i) {
        x[i] += a * p[i];
        r[i] -= a * mp[i];
      }
      const double rs_new = dot(r, r);
      const double beta = rs_new / rs;
      rs = rs_new;
      for (size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }

    // z-update: element-wise soft threshold; u: dual ascent.
    grad_op(x.data(), w, h, gx.data());
    double prim = 0.0;
    for (size_t i = 0; i < gn; ++i) {
      z[i] = soft_threshold(gx[i] + u[i], cfg.alpha / rho);
      const double d = gx[i] - z[i];
      u[i] += d;
      prim += d * d;
    }
    res.objective.push_back(objective(x));
    res.primal_residual.push_back(std::sqrt(prim));

    if (cfg.adapt_rho) {
      // Residual balancing: dual residual ~ rho * ||grad'(z_k - z_{k-1})||;
      // cheap proxy comparing primal to alpha-scaled magnitude.
      const double pr = res.primal_residual.back();
      const double zn = norm2(z) + 1e-30;
      if (pr > 10.0 * cfg.cg_tol * zn && pr > 1e-1 * zn) {
        rho *= 2.0;
        for (auto& v : u) v *= 0.5;
      }
    }
  }

  ImageGrid img(w, h, shape.pixel_size_mm);
  img.values = std::move(x);
  res.image = std::move(img);
  return res;
}

}  // namespace ldct
