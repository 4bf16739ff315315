#pragma once

#include <vector>

#include "robopose/grid.hpp"

namespace robopose {

struct Skeleton {
    PixelGrid grid;
    /// Raster order.
    std::vector<Point> endpoints;
};

struct GapRepairConfig {
    /// Endpoint pairs strictly closer than this (Euclidean, pixels) are joined.
    double gap_threshold = 10.0;
};

/// Zhang-Suen thinning. Each parallel sub-iteration is committed pixel by pixel,
/// and a candidate is only removed if it is still a simple point with at least
/// two neighbours; a final pass strips simple pixels left in 2x2 blocks and
/// staircase corners. Preserves the 8-connected component count.
Skeleton skeletonize(const PixelGrid& mask);

/// Pixels where the 3x3 kernel [[1,1,1],[1,10,1],[1,1,1]] responds with 11
/// (zero padding), i.e. foreground pixels with exactly one foreground 8-neighbour.
std::vector<Point> detect_endpoints(const PixelGrid& skel);

/// Kernel response at (x, y); exposed for tests and debugging.
int endpoint_kernel_response(const PixelGrid& skel, int x, int y);

/// Joins every endpoint pair closer than gap_threshold with a Bresenham line.
/// Single pass over the original endpoint set.
PixelGrid connect_gaps(const PixelGrid& skel, const GapRepairConfig& cfg = {});

/// Removes every branch that runs from an endpoint to a junction (a pixel with
/// three or more neighbours) in at most max_length pixels. Single pass; chains
/// that end without reaching a junction are kept whole.
PixelGrid prune_spurs(const PixelGrid& skel, int max_length);

/// Integer line from a to b inclusive.
std::vector<Point> bresenham_line(Point a, Point b);

/// Number of foreground 8-neighbours (out-of-bounds counts as background).
int neighbor_count(const PixelGrid& grid, int x, int y);

/// True if no 2x2 window is fully foreground.
bool is_thin(const PixelGrid& grid);

}  // namespace robopose
