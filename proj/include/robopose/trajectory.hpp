#pragma once

#include <span>
#include <vector>

#include "robopose/skeleton.hpp"

namespace robopose {

/// Simple 8-connected pixel chain.
struct PixelPath {
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Point& front() const { return points.front(); }
    const Point& back() const { return points.back(); }

    friend bool operator==(const PixelPath&, const PixelPath&) = default;
};

/// True if points are distinct and consecutive points are 8-adjacent.
bool is_simple_path(const PixelPath& path);

struct ScoreWeights {
    double length = 0.2;
    double smoothness = 0.4;
    double consistency = 0.4;
};

struct PathScores {
    /// Raw length in points.
    double score_l = 0.0;
    /// Mean |cos| of the turn angle at interior vertices, in [0, 1].
    double score_s = 0.0;
    /// Mean |cos| between each step and the start-to-end vector, in [0, 1].
    double score_c = 0.0;
    /// 1 - min-max normalised length over the candidate set (shorter scores higher).
    double length_term = 0.0;
    /// w_l * length_term + w_s * score_s + w_c * score_c.
    double total = 0.0;
};

struct TraceConfig {
    int boundary_margin = 5;
    int max_depth = 4096;
    ScoreWeights weights;
};

/// Endpoints within boundary_margin of an image border; all endpoints if none are.
std::vector<Point> find_start_points(const Skeleton& skel, const TraceConfig& cfg = {});

/// Depth-first tracing from `start`. At a branching pixel every unvisited branch
/// is explored against a shared visited set and the longest one is kept.
/// Paths are capped at cfg.max_depth points. Throws DomainError if `start` is
/// not a skeleton pixel.
PixelPath trace_paths(const Skeleton& skel, Point start, const TraceConfig& cfg = {});

double smoothness_score(const PixelPath& path);
double consistency_score(const PixelPath& path);

/// Scores of a single path taken as a one-element candidate set.
PathScores score_path(const PixelPath& path, const ScoreWeights& weights = {});

/// Scores with the length term normalised across `candidates`.
std::vector<PathScores> score_candidates(std::span<const PixelPath> candidates, const ScoreWeights& weights = {});

struct SelectedPath {
    PixelPath path;
    Point head;
    PathScores scores;
    std::size_t index = 0;  // position in the candidate list
};

/// Highest total wins; ties go to the smallest head, then the start point
/// first in raster order. Throws NotFoundError on an empty list.
SelectedPath select_optimal_path(std::span<const PixelPath> candidates, const ScoreWeights& weights = {});

}  // namespace robopose
