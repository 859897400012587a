#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gblend/raster.hpp"

namespace gblend {

/// Linear [0,1] -> 8-bit sRGB.
std::uint8_t encode_srgb8(double linear);

/// Binary P6, 8-bit, sRGB-encoded.
std::string encode_ppm(const Framebuffer& fb);
void write_ppm(const std::filesystem::path& path, const Framebuffer& fb);
void write_png(const std::filesystem::path& path, const Framebuffer& fb);

/// Mean over factor x factor blocks (width and height must be divisible).
Framebuffer box_downsample(const Framebuffer& fb, int factor);

/// Per-pixel |a - b| averaged over channels, scaled by `gain`, written as
/// grey into an rgb frame.
Framebuffer difference_image(const Framebuffer& a, const Framebuffer& b, double gain = 4.0);

}  // namespace gblend
