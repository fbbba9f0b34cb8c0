#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcg/graph.hpp"

namespace tcg {

// Ink coverage per pixel, row-major; 0 is background, 255 full stroke.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> ink;

  std::uint8_t at(std::size_t x, std::size_t y) const { return ink[y * width + x]; }
};

// Anti-aliased strokes of every edge (coverage falls off linearly over one
// pixel at the stroke boundary). Normalized coordinates are scaled by
// max(width, height). node_radius_px > 0 also draws node discs.
GrayImage rasterize(const SpatialGraph& g, std::size_t width, std::size_t height,
                    double stroke_px, double node_radius_px = 0.0);

// 8-bit grayscale PNG, white background and black strokes.
std::vector<std::uint8_t> encode_png(const GrayImage& img);
void write_png(const GrayImage& img, const std::filesystem::path& path);

std::string to_svg(const SpatialGraph& g, std::size_t width, std::size_t height, double stroke_px);

}  // namespace tcg
