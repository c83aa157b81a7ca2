#pragma once

#include <cstddef>

#include "ldct/types.hpp"

namespace ldct {

// Target raster for backprojection / reconstruction.
struct GridShape {
  int width = 0;
  int height = 0;
  double pixel_size_mm = 1.0;
};

// Fan-beam forward projection of `image` with Joseph's method (driving-axis
// linear interpolation). Rays that miss the grid contribute zero.
Sinogram forward_project(const ImageGrid& image, const FanBeamGeometry& geom,
                         int threads = 1);

// Exact adjoint of forward_project (same interpolation weights, scattered).
ImageGrid back_project(const Sinogram& sino, const FanBeamGeometry& geom,
                       const GridShape& shape, int threads = 1);

// Matrix-free linear operator interface; couples the projector to the
// training loss and the ADMM solver without materializing A.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual size_t domain_size() const = 0;
  virtual size_t range_size() const = 0;
  virtual void apply(const double* x, double* y) const = 0;          // y = A x
  virtual void apply_adjoint(const double* s, double* x) const = 0;  // x = A' s
};

class ProjectorOperator final : public LinearOperator {
 public:
  ProjectorOperator(const FanBeamGeometry& geom, const GridShape& shape,
                    int threads = 1)
      : geom_(geom), shape_(shape), threads_(threads) {}

  size_t domain_size() const override {
    return static_cast<size_t>(shape_.width) * shape_.height;
  }
  size_t range_size() const override {
    return static_cast<size_t>(geom_.num_views) * geom_.num_bins;
  }
  void apply(const double* x, double* y) const override;
  void apply_adjoint(const double* s, double* x) const override;

  const FanBeamGeometry& geometry() const { return geom_; }
  const GridShape& shape() const { return shape_; }

 private:
  FanBeamGeometry geom_;
  GridShape shape_;
  int threads_;
};

}  // namespace ldct
