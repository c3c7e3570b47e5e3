#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "polygate/geometry.hpp"

namespace polygate {

/// 8-bit interleaved raster with 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

/// Decodes PNG/JPG/BMP/TIFF. Color files come back as RGB, gray files as 1 channel.
Image load_image(const std::filesystem::path& path);

/// Decodes any supported file and converts it to one luminance channel.
GrayImage load_gray(const std::filesystem::path& path);

/// Writes a lossless PNG. Used by fixture generators and tests.
void write_png(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

/// True for extensions `load_image` accepts (case-insensitive).
bool is_image_file(const std::filesystem::path& path);

}  // namespace polygate
