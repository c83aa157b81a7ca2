#pragma once

#include <cstdint>
#include <string>

#include "ldct/types.hpp"

namespace ldct {

enum class PhantomKind { SheppLogan, DiskGrid, PiecewiseBlobs };

PhantomKind phantom_kind_from_string(const std::string& s);

// Deterministic digital phantoms with values in [0, attenuation_max].
// Edges are rasterized with 4x4 subpixel supersampling. `seed` only affects
// the randomized kinds; shepp_logan ignores it. disk_grid uses integer-derived
// arithmetic only, so it is bit-identical across platforms.
ImageGrid make_phantom(int size, PhantomKind kind, uint64_t seed,
                       double attenuation_max = 0.04,
                       double pixel_size_mm = 1.0);

}  // namespace ldct
