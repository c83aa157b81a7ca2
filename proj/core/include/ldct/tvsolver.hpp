#pragma once

#include <vector>

#include "ldct/projector.hpp"
#include "ldct/types.hpp"

namespace ldct {

struct AdmmConfig {
  double alpha = 0.02;  // TV weight
  double rho = 1.0;     // penalty parameter
  int outer_iters = 200;
  int cg_iters = 30;
  double cg_tol = 1e-10;
  bool warm_start_fbp = true;
  bool adapt_rho = false;  // residual balancing (off: keeps runs reproducible)
};

void validate(const AdmmConfig& cfg);

struct AdmmResult {
  ImageGrid image;
  std::vector<double> objective;        // ||Ax-y||^2 + alpha*||grad x||_1 per outer iter
  std::vector<double> primal_residual;  // ||grad x - z||_2 per outer iter
};

// Forward differences with replicate boundary, stacked [dh; dv] (2*w*h).
void grad_op(const double* x, int width, int height, double* out);
// Exact negative adjoint of grad_op: <grad x, z> = -<x, div z>.
void div_op(const double* z, int width, int height, double* out);

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// PWLS-TV baseline, min_x ||Ax-y||^2 + alpha*||grad x||_1 by ADMM with a
// conjugate-gradient x-update on matrix-free operators.
AdmmResult pwls_tv_admm(const Sinogram& y, const FanBeamGeometry& geom,
                        const GridShape& shape, const AdmmConfig& cfg,
                        int threads = 1);

}  // namespace ldct
