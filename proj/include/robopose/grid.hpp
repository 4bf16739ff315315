#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "robopose/types.hpp"

namespace robopose {

/// Rectangular binary raster, row-major. Carrier for masks and skeletons.
class PixelGrid {
public:
    PixelGrid() = default;
    /// Throws DomainError if either dimension is < 1.
    PixelGrid(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return cells_.empty(); }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool in_bounds(const Point& p) const { return in_bounds(p.x, p.y); }

    bool at(int x, int y) const { return cells_[index(x, y)] != 0; }
    bool at(const Point& p) const { return at(p.x, p.y); }
    /// Out-of-bounds reads as background.
    bool get(int x, int y) const { return in_bounds(x, y) && at(x, y); }

    void set(int x, int y, bool v = true) { cells_[index(x, y)] = v ? 1 : 0; }
    void set(const Point& p, bool v = true) { set(p.x, p.y, v); }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    std::span<const std::uint8_t> cells() const { return cells_; }
    std::span<std::uint8_t> cells() { return cells_; }

    std::size_t count() const;
    /// Foreground pixels in raster order.
    std::vector<Point> foreground() const;

    friend bool operator==(const PixelGrid&, const PixelGrid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> cells_;
};

/// 8-bit single-channel image.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Foreground iff gray value >= threshold.
PixelGrid threshold_image(const GrayImage& image, int threshold);
/// Foreground -> 255, background -> 0.
GrayImage to_gray(const PixelGrid& grid);

enum class Connectivity { Four = 4, Eight = 8 };

struct ComponentLabeling {
    int width = 0;
    int height = 0;
    /// 0 = background; components numbered 1..n in raster order of their first pixel.
    std::vector<int> labels;
    /// component_sizes[k] is the area of label k; index 0 is unused and 0.
    std::vector<std::size_t> component_sizes;

    int count() const { return static_cast<int>(component_sizes.size()) - 1; }
    int label_at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

ComponentLabeling label_components(const PixelGrid& grid, Connectivity connectivity);

struct CleanConfig {
    std::size_t min_area = 64;
    std::size_t max_hole_area = 64;
};

/// Removes foreground 8-components smaller than min_area, then fills background
/// 4-components of at most max_hole_area that do not touch the border.
PixelGrid clean_mask(const PixelGrid& grid, const CleanConfig& cfg = {});

}  // namespace robopose
