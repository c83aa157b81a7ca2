#include "ldct/sim.hpp"

#include <cmath>

#include "ldct/projector.hpp"
#include "ldct/rng.hpp"

namespace ldct {

namespace {
constexpr double kCountFloor = 0.1;
}

RawCounts simulate_counts(const Sinogram& line_integrals, const DoseModel& dose,
                          uint64_t seed) {
  validate(dose);
  RawCounts out(line_integrals.num_views, line_integrals.num_bins);
  const double sigma = std::sqrt(dose.sigma_e2);
  for (int v = 0; v < line_integrals.num_views; ++v) {
    for (int b = 0; b < line_integrals.num_bins; ++b) {
      const size_t i = static_cast<size_t>(v) * line_integrals.num_bins + b;
      // exp underflow clamps the Poisson mean to zero; not an error.
      const double mean = dose.intensity * std::exp(-line_integrals.values[i]);
      CounterRng rng(seed, static_cast<uint64_t>(v), static_cast<uint64_t>(b));
      double counts = static_cast<double>(rng.poisson(mean));
      if (sigma > 0.0) counts += sigma * rng.gaussian();
      out.values[i] = counts;
    }
  }
  return out;
}

RawCounts simulate_counts(const ImageGrid& image, const FanBeamGeometry& geom,
                          const DoseModel& dose, uint64_t seed, int threads) {
  return simulate_counts(forward_project(image, geom, threads), dose, seed);
}

Sinogram log_transform(const RawCounts& raw, const DoseModel& dose) {
  validate(dose);
  Sinogram y(raw.num_views, raw.num_bins);
  for (size_t i = 0; i < raw.values.size(); ++i)
    y.values[i] = std::log(dose.intensity / std::max(raw.values[i], kCountFloor));
  return y;
}

RawCounts expected_counts(const Sinogram& line_integrals, const DoseModel& dose) {
  validate(dose);
  RawCounts out(line_integrals.num_views, line_integrals.num_bins);
  for (size_t i = 0; i < line_integrals.values.size(); ++i)
    out.values[i] = dose.intensity * std::exp(-line_integrals.values[i]);
  return out;
}

}  // namespace ldct
