#include "robopose/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace robopose {

namespace {

// 4-neighbours first so straight runs are followed before diagonals.
constexpr int kDx[8] = {0, 1, 0, -1, 1, 1, -1, -1};
constexpr int kDy[8] = {-1, 0, 1, 0, -1, 1, 1, -1};

class Tracer {
public:
    Tracer(const PixelGrid& grid, int max_depth)
        : grid_(grid), max_depth_(max_depth), visited_(grid.cells().size(), 0) {}

    std::vector<Point> run(Point start) {
        visit(start);
        return explore(start, max_depth_);
    }

private:
    void visit(Point p) { visited_[grid_.index(p.x, p.y)] = 1; }
    bool open(int x, int y) const { return grid_.get(x, y) && !visited_[grid_.index(x, y)]; }

    // `p` is already visited; the returned path starts at p and has at most `budget` points.
    std::vector<Point> explore(Point p, int budget) {
        std::vector<Point> path{p};
        Point cur = p;
        while (static_cast<int>(path.size()) < budget) {
            int n_open = 0;
            Point only{};
            for (int k = 0; k < 8; ++k) {
                if (open(cur.x + kDx[k], cur.y + kDy[k])) {
                    ++n_open;
                    only = {cur.x + kDx[k], cur.y + kDy[k]};
                }
            }
            if (n_open == 0) break;
            if (n_open == 1) {
                visit(only);
                path.push_back(only);
                cur = only;
                continue;
            }

            const int remaining = budget - static_cast<int>(path.size());
            std::vector<Point> best;
            for (int k = 0; k < 8; ++k) {
                const Point n{cur.x + kDx[k], cur.y + kDy[k]};
                if (!open(n.x, n.y)) continue;  // may have been taken by an earlier branch
                visit(n);
                auto branch = explore(n, remaining);
                if (branch.size() > best.size()) best = std::move(branch);
            }
            path.insert(path.end(), best.begin(), best.end());
            break;
        }
        return path;
    }

    const PixelGrid& grid_;
    int max_depth_;
    std::vector<std::uint8_t> visited_;
};

double abs_cos(const Vec2& a, const Vec2& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::min(1.0, std::abs(dot(a, b)) / (na * nb));
}

Vec2 step(const Point& a, const Point& b) { return {static_cast<double>(b.x - a.x), static_cast<double>(b.y - a.y)}; }

}  // namespace

bool is_simple_path(const PixelPath& path) {
    std::set<Point> seen;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (!seen.insert(path.points[i]).second) return false;
        if (i > 0 && !is_8_adjacent(path.points[i - 1], path.points[i])) return false;
    }
    return true;
}

std::vector<Point> find_start_points(const Skeleton& skel, const TraceConfig& cfg) {
    if (skel.grid.empty()) return {};
    const int w = skel.grid.width();
    const int h = skel.grid.height();
    std::vector<Point> near_border;
    for (const Point& p : skel.endpoints) {
        const int d = std::min({p.x, p.y, w - 1 - p.x, h - 1 - p.y});
        if (d <= cfg.boundary_margin) near_border.push_back(p);
    }
    return near_border.empty() ? skel.endpoints : near_border;
}

PixelPath trace_paths(const Skeleton& skel, Point start, const TraceConfig& cfg) {
    if (cfg.max_depth < 1) throw DomainError("max_depth must be >= 1");
    if (skel.grid.empty() || !skel.grid.in_bounds(start) || !skel.grid.at(start)) {
        throw DomainError("trace start is not a skeleton pixel");
    }
    Tracer tracer(skel.grid, cfg.max_depth);
    return PixelPath{tracer.run(start)};
}

double smoothness_score(const PixelPath& path) {
    const std::size_t n = path.size();
    if (n < 3) return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        sum += abs_cos(step(path.points[i], path.points[i + 1]), step(path.points[i + 1], path.points[i + 2]));
    }
    return sum / static_cast<double>(n - 2);
}

double consistency_score(const PixelPath& path) {
    const std::size_t n = path.size();
    if (n < 2) return 0.0;
    const Vec2 main = step(path.front(), path.back());
    if (main.norm() == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) sum += abs_cos(step(path.points[i], path.points[i + 1]), main);
    return sum / static_cast<double>(n - 1);
}

std::vector<PathScores> score_candidates(std::span<const PixelPath> candidates, const ScoreWeights& weights) {
    std::vector<PathScores> out;
    if (candidates.empty()) return out;
    const auto [lo, hi] = std::minmax_element(candidates.begin(), candidates.end(),
                                              [](const PixelPath& a, const PixelPath& b) { return a.size() < b.size(); });
    const double min_len = static_cast<double>(lo->size());
    const double max_len = static_cast<double>(hi->size());
    out.reserve(candidates.size());
    for (const auto& path : candidates) {
        PathScores s;
        s.score_l = static_cast<double>(path.size());
        s.score_s = smoothness_score(path);
        s.score_c = consistency_score(path);
        s.length_term = max_len > min_len ? 1.0 - (s.score_l - min_len) / (max_len - min_len) : 1.0;
        s.total = weights.length * s.length_term + weights.smoothness * s.score_s + weights.consistency * s.score_c;
        out.push_back(s);
    }
    return out;
}

PathScores score_path(const PixelPath& path, const ScoreWeights& weights) {
    return score_candidates(std::span<const PixelPath>(&path, 1), weights).front();
}

SelectedPath select_optimal_path(std::span<const PixelPath> candidates, const ScoreWeights& weights) {
    if (candidates.empty()) throw NotFoundError("no candidate trajectory");
    for (const auto& c : candidates) {
        if (c.empty()) throw DomainError("empty candidate path");
    }
    const auto scores = score_candidates(candidates, weights);
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& a = scores[i];
        const auto& b = scores[best];
        if (a.total != b.total) {
            if (a.total > b.total) best = i;
            continue;
        }
        const Point ha = candidates[i].back();
        const Point hb = candidates[best].back();
        if (ha != hb) {
            if (ha < hb) best = i;
            continue;
        }
        if (raster_less(candidates[i].front(), candidates[best].front())) best = i;
    }
    return {candidates[best], candidates[best].back(), scores[best], best};
}

}  // namespace robopose
