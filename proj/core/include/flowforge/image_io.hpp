#pragma once

#include <filesystem>

#include "flowforge/raster.hpp"

namespace flowforge {

// Reads a PNG or binary PPM/PGM into float RGB; gray sources are broadcast.
Image read_image(const std::filesystem::path& path);

// Reads a grayscale mask (PNG or PGM); RGB sources use the luminance.
AlphaMask read_mask(const std::filesystem::path& path);

// 8-bit PNG, values quantized with round(v * 255). Output bytes are
// deterministic for identical pixel data (fixed compression settings).
void write_png(const std::filesystem::path& path, const Image& img);
void write_png(const std::filesystem::path& path, const AlphaMask& mask);

// Bilinear resize to exactly (w, h).
Image resize(const Image& img, int w, int h);

}  // namespace flowforge
