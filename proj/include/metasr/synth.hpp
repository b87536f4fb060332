#pragma once

#include "metasr/image.hpp"

#include <cstdint>

namespace metasr {

/// Procedural RGB test scene: a smooth gradient backdrop overlaid with
/// randomly placed hard-edged ellipses and rectangles, some flat, some
/// shaded, some striped, plus light grain. Deterministic in `seed` and
/// quantised to 8 bits. Used for desk-scale corpora and tests.
ImageBuffer synthetic_scene(int height, int width, std::uint64_t seed);

}  // namespace metasr
