#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridsr/grid.hpp"

namespace gridsr {

// Minimal PNG writer (8-bit RGB, zlib container with stored deflate blocks).
void write_png(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb);

// Renders a field as a PNG with a fixed value range mapped through a
// sequential colormap; values outside [vmin, vmax] are clamped.
void render_field_png(const std::string& path, const Field& field, double vmin, double vmax,
                      int cell_pixels = 4);

} // namespace gridsr
