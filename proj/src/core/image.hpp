#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace declarui {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> luma;  // row-major, values in [0,255]

  double at(int x, int y) const { return luma[static_cast<size_t>(y) * width + x]; }
};

// Decodes PNG/JPEG and converts to luma with BT.601 weights.
GrayImage load_screenshot(const std::string& path);

// Brings two images to a shared canvas: the smaller one is upscaled
// (bilinear) to the larger one's dimensions.
std::pair<GrayImage, GrayImage> match_dimensions(GrayImage a, GrayImage b);

GrayImage gray_from_bytes(int width, int height,
                          const std::vector<std::uint8_t>& pixels);

void write_gray_png(const std::string& path, const GrayImage& image);

std::pair<int, int> png_dimensions(const std::string& path);

}  // namespace declarui
