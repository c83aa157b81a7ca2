#pragma once

#include <cstdint>

#include "ldct/types.hpp"

namespace ldct {

// Low-dose measurement model: counts_i ~ Poisson(I exp(-[Ax]_i)) + N(0, sigma_e2).
// Each bin draws from its own stream keyed by (seed, view, bin), so the output
// is deterministic per (inputs, seed) regardless of evaluation order.
RawCounts simulate_counts(const Sinogram& line_integrals, const DoseModel& dose,
                          uint64_t seed);

// Convenience overload: forward-projects the image first.
RawCounts simulate_counts(const ImageGrid& image, const FanBeamGeometry& geom,
                          const DoseModel& dose, uint64_t seed, int threads = 1);

// Log transform y_i = ln(I / max(counts_i, 0.1)); the 0.1-count floor keeps
// the transform total when electronic noise drives counts nonpositive.
Sinogram log_transform(const RawCounts& raw, const DoseModel& dose);

// Noiseless expected counts I exp(-l); reference for moment checks.
RawCounts expected_counts(const Sinogram& line_integrals, const DoseModel& dose);

}  // namespace ldct
