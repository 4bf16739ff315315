#pragma once

#include <filesystem>

#include "robopose/grid.hpp"

namespace robopose {

/// Reads an 8-bit grayscale image from PNG (any color type, converted to gray)
/// or PGM (P2/P5). Throws IoError if unreadable, FormatError on bad content.
GrayImage read_gray_image(const std::filesystem::path& path);

/// Writes PNG or PGM (P5) depending on the extension (.png, .pgm).
void write_gray_image(const std::filesystem::path& path, const GrayImage& image);

PixelGrid load_mask(const std::filesystem::path& path, int threshold = 128);

/// Writes foreground as 255, background as 0.
void save_mask(const std::filesystem::path& path, const PixelGrid& grid);

}  // namespace robopose
