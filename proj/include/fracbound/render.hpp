#pragma once

#include <filesystem>

#include "fracbound/engine.hpp"

namespace fracbound {

// Renders a scan with intensities as a binary PPM (P6, maxval 255) strip.
// Bounded points color the blue channel, divergent points the red one.
// Within each class, log10 intensity is clamped to the class range over the
// image and mapped linearly to channel value 64..255. width == 0 renders one
// column per grid point; otherwise columns sample the grid evenly.
// Deterministic: identical scans yield byte-identical files.
void render_intensity_strip(const DivergenceScan& scan, const std::filesystem::path& path,
                            int height, std::uint64_t width = 0);

}  // namespace fracbound
