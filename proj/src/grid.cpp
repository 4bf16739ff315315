#include "robopose/grid.hpp"

#include <algorithm>

namespace robopose {

PixelGrid::PixelGrid(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw DomainError("PixelGrid dimensions must be >= 1");
    }
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t PixelGrid::count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::vector<Point> PixelGrid::foreground() const {
    std::vector<Point> out;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (at(x, y)) out.push_back({x, y});
        }
    }
    return out;
}

PixelGrid threshold_image(const GrayImage& image, int threshold) {
    PixelGrid grid(image.width, image.height);
    auto cells = grid.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i] = image.pixels[i] >= threshold ? 1 : 0;
    }
    return grid;
}

GrayImage to_gray(const PixelGrid& grid) {
    GrayImage img{grid.width(), grid.height(), {}};
    img.pixels.reserve(grid.cells().size());
    for (auto c : grid.cells()) img.pixels.push_back(c ? 255 : 0);
    return img;
}

namespace {

constexpr int kDx8[] = {1, 0, -1, 0, 1, -1, -1, 1};
constexpr int kDy8[] = {0, 1, 0, -1, 1, 1, -1, -1};

// Labels cells whose value equals `value`.
ComponentLabeling label_value(const PixelGrid& grid, std::uint8_t value, Connectivity connectivity) {
    const int w = grid.width();
    const int h = grid.height();
    const int nbrs = connectivity == Connectivity::Eight ? 8 : 4;
    const auto cells = grid.cells();

    ComponentLabeling out;
    out.width = w;
    out.height = h;
    out.labels.assign(cells.size(), 0);
    out.component_sizes.assign(1, 0);

    std::vector<Point> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = grid.index(x, y);
            if (cells[idx] != value || out.labels[idx] != 0) continue;

            const int label = static_cast<int>(out.component_sizes.size());
            std::size_t area = 0;
            out.labels[idx] = label;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                ++area;
                for (int k = 0; k < nbrs; ++k) {
                    const int nx = p.x + kDx8[k];
                    const int ny = p.y + kDy8[k];
                    if (!grid.in_bounds(nx, ny)) continue;
                    const std::size_t n = grid.index(nx, ny);
                    if (cells[n] == value && out.labels[n] == 0) {
                        out.labels[n] = label;
                        stack.push_back({nx, ny});
                    }
                }
            }
            out.component_sizes.push_back(area);
        }
    }
    return out;
}

}  // namespace

ComponentLabeling label_components(const PixelGrid& grid, Connectivity connectivity) {
    return label_value(grid, 1, connectivity);
}

PixelGrid clean_mask(const PixelGrid& grid, const CleanConfig& cfg) {
    PixelGrid out = grid;
    auto cells = out.cells();

    const auto fg = label_value(grid, 1, Connectivity::Eight);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const int l = fg.labels[i];
        if (l != 0 && fg.component_sizes[l] < cfg.min_area) cells[i] = 0;
    }

    // Holes are computed after speck removal so that a second pass is a no-op.
    const auto bg = label_value(out, 0, Connectivity::Four);
    std::vector<bool> touches_border(bg.component_sizes.size(), false);
    const int w = out.width();
    const int h = out.height();
    auto mark = [&](int x, int y) {
        const int l = bg.label_at(x, y);
        if (l != 0) touches_border[l] = true;
    };
    for (int x = 0; x < w; ++x) { mark(x, 0); mark(x, h - 1); }
    for (int y = 0; y < h; ++y) { mark(0, y); mark(w - 1, y); }

    for (std::size_t i = 0; i < cells.size(); ++i) {
        const int l = bg.labels[i];
        if (l != 0 && !touches_border[l] && bg.component_sizes[l] <= cfg.max_hole_area) cells[i] = 1;
    }
    return out;
}

}  // namespace robopose
