#include "robopose/pose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robopose {

FittedSegment fit_segment(std::span<const Vec2> points) {
    if (points.size() < 2) throw DegenerateInputError("line fit needs at least two distinct points");
    const bool distinct = std::any_of(points.begin() + 1, points.end(), [&](const Vec2& p) { return p != points.front(); });
    if (!distinct) throw DegenerateInputError("line fit needs at least two distinct points");

    Vec2 mean;
    for (const auto& p : points) mean += p;
    mean = mean / static_cast<double>(points.size());

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        const Vec2 d = p - mean;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }

    Vec2 dir;
    const double spread = sxx + syy;
    if (std::abs(sxx - syy) <= 1e-12 * spread && std::abs(sxy) <= 1e-12 * spread) {
        // Isotropic scatter has no principal axis; fall back to the chord.
        const Vec2 chord = points.back() - points.front();
        dir = chord.norm() > 0.0 ? chord.normalized() : Vec2{1.0, 0.0};
    } else {
        const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
        dir = {std::cos(angle), std::sin(angle)};
    }

    double t_first = dot(points.front() - mean, dir);
    double t_last = dot(points.back() - mean, dir);
    if (t_last < t_first) {
        dir = -dir;
        t_first = -t_first;
        t_last = -t_last;
    }
    return {mean + dir * t_first, mean, mean + dir * t_last, dir};
}

FittedSegment fit_segment(std::span<const Point> points) {
    std::vector<Vec2> v;
    v.reserve(points.size());
    for (const auto& p : points) v.emplace_back(p);
    return fit_segment(std::span<const Vec2>(v));
}

FittedSegment reversed(const FittedSegment& seg) {
    return {seg.end, seg.center, seg.start, -seg.direction};
}

FittedSegment oriented_along(const FittedSegment& seg, const Vec2& reference) {
    return dot(seg.direction, reference) < 0.0 ? reversed(seg) : seg;
}

namespace {

std::span<const Point> head_window_span(const PixelPath& path, int window) {
    if (window < 2) throw DomainError("head window must be >= 2");
    if (path.size() < 2) throw DegenerateInputError("robot path needs at least two points");
    const std::size_t n = std::min(path.size(), static_cast<std::size_t>(window));
    return std::span<const Point>(path.points).last(n);
}

constexpr int kDx[8] = {0, 1, 0, -1, 1, 1, -1, -1};
constexpr int kDy[8] = {-1, 0, 1, 0, -1, 1, 1, -1};

}  // namespace

FittedSegment extract_head_segment(const PixelPath& robot_path, int window) {
    return fit_segment(head_window_span(robot_path, window));
}

Point head_window_tail(const PixelPath& robot_path, int window) {
    return head_window_span(robot_path, window).front();
}

Point nearest_skeleton_pixel(const PixelGrid& skel, Point p) {
    long best = std::numeric_limits<long>::max();
    Point out{};
    bool found = false;
    for (int y = 0; y < skel.height(); ++y) {
        for (int x = 0; x < skel.width(); ++x) {
            if (!skel.at(x, y)) continue;
            const long dx = x - p.x;
            const long dy = y - p.y;
            const long d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                out = {x, y};
                found = true;
            }
        }
    }
    if (!found) throw NotFoundError("vessel skeleton is empty");
    return out;
}

namespace {

class VesselWalker {
public:
    explicit VesselWalker(const PixelGrid& skel) : skel_(skel), visited_(skel.cells().size(), 0) {}

    void visit(Point p) { visited_[skel_.index(p.x, p.y)] = 1; }
    bool open(Point p) const { return skel_.get(p.x, p.y) && !visited_[skel_.index(p.x, p.y)]; }

    std::vector<Point> open_neighbors(Point p) const {
        std::vector<Point> out;
        for (int k = 0; k < 8; ++k) {
            const Point n{p.x + kDx[k], p.y + kDy[k]};
            if (open(n)) out.push_back(n);
        }
        return out;
    }

    // Continues from origin -> first for up to `budget` pixels, choosing the
    // neighbour that deviates least from the recent heading.
    std::vector<Point> walk(Point origin, Point first, int budget) {
        std::vector<Point> trail{origin, first};
        while (static_cast<int>(trail.size()) - 1 < budget) {
            const Point cur = trail.back();
            const auto cands = open_neighbors(cur);
            if (cands.empty()) break;
            const Point anchor = trail[trail.size() > 5 ? trail.size() - 6 : 0];
            const Vec2 heading = Vec2(cur) - Vec2(anchor);
            Point best = cands.front();
            double best_cos = -2.0;
            for (const Point& c : cands) {
                const Vec2 s = Vec2(c) - Vec2(cur);
                const double cs = dot(s, heading) / (s.norm() * heading.norm());
                if (cs > best_cos + 1e-12) {
                    best_cos = cs;
                    best = c;
                }
            }
            visit(best);
            trail.push_back(best);
        }
        return {trail.begin() + 1, trail.end()};
    }

private:
    const PixelGrid& skel_;
    std::vector<std::uint8_t> visited_;
};

}  // namespace

std::vector<Point> vessel_window(const PixelGrid& vessel_skel, Point head, int half_window) {
    if (half_window < 1) throw DomainError("half_window must be >= 1");
    const Point centre = nearest_skeleton_pixel(vessel_skel, head);
    VesselWalker walker(vessel_skel);
    walker.visit(centre);
    const auto nbrs = walker.open_neighbors(centre);
    if (nbrs.empty()) return {centre};

    // The two neighbours spanning the widest angle give the two walk directions.
    std::size_t ia = 0, ib = nbrs.size();
    double min_cos = 2.0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
            const Vec2 a = Vec2(nbrs[i]) - Vec2(centre);
            const Vec2 b = Vec2(nbrs[j]) - Vec2(centre);
            const double c = dot(a, b) / (a.norm() * b.norm());
            if (c < min_cos - 1e-12) {
                min_cos = c;
                ia = i;
                ib = j;
            }
        }
    }

    walker.visit(nbrs[ia]);
    if (ib < nbrs.size()) walker.visit(nbrs[ib]);
    const auto forward = walker.walk(centre, nbrs[ia], half_window);
    std::vector<Point> backward;
    if (ib < nbrs.size()) backward = walker.walk(centre, nbrs[ib], half_window);

    std::vector<Point> out(backward.rbegin(), backward.rend());
    out.push_back(centre);
    out.insert(out.end(), forward.begin(), forward.end());
    return out;
}

FittedSegment extract_vessel_segment(const PixelGrid& vessel_skel, Point head, int half_window) {
    const auto pts = vessel_window(vessel_skel, head, half_window);
    return fit_segment(std::span<const Point>(pts));
}

PoseParameters pose_from_offsets(double c_head, double c_tail, double theta_deg) {
    PoseParameters p;
    p.c_head = c_head;
    p.c_tail = c_tail;
    p.d_head = std::abs(c_head);
    p.d_tail = std::abs(c_tail);
    p.s = (c_head < 0.0) != (c_tail < 0.0);
    p.theta_deg = theta_deg;
    return p;
}

PoseParameters compute_pose(const FittedSegment& robot_seg, const Vec2& robot_tail_point, const FittedSegment& vessel_seg) {
    const Vec2& u_v = vessel_seg.direction;
    const Vec2& q = vessel_seg.center;
    const double c_head = cross(u_v, robot_seg.end - q);
    const double c_tail = cross(u_v, robot_tail_point - q);
    const double cos_theta = std::clamp(dot(robot_seg.direction, u_v), -1.0, 1.0);
    return pose_from_offsets(c_head, c_tail, rad_to_deg(std::acos(cos_theta)));
}

PoseState classify_state(const PoseParameters& p, const PoseThresholds& t, const SteeringConfig& steering) {
    if (!(t.d_allow > 0.0) || !(t.theta_allow_deg > 0.0)) throw DomainError("pose thresholds must be > 0");
    if (p.d_head < t.d_allow && p.d_tail < t.d_allow && p.theta_deg < t.theta_allow_deg) {
        return {PoseLabel::A, SpeedHint::High, 0.0};
    }
    if (p.s && p.d_head <= p.d_tail) return {PoseLabel::B, SpeedHint::Reduced, 0.0};
    const double steer = std::min(p.theta_deg, steering.theta_max_deg) * steering.gain;
    if (p.s) return {PoseLabel::C, SpeedHint::Minimum, steer};
    return {PoseLabel::D, SpeedHint::Moderate, steer};
}

std::string_view to_string(PoseLabel label) {
    switch (label) {
        case PoseLabel::A: return "A";
        case PoseLabel::B: return "B";
        case PoseLabel::C: return "C";
        case PoseLabel::D: return "D";
    }
    return "?";
}

std::string_view to_string(SpeedHint hint) {
    switch (hint) {
        case SpeedHint::High: return "high";
        case SpeedHint::Reduced: return "reduced";
        case SpeedHint::Minimum: return "minimum";
        case SpeedHint::Moderate: return "moderate";
    }
    return "?";
}

PoseLabel parse_label(std::string_view s) {
    if (s == "A") return PoseLabel::A;
    if (s == "B") return PoseLabel::B;
    if (s == "C") return PoseLabel::C;
    if (s == "D") return PoseLabel::D;
    throw DomainError("unknown pose label: " + std::string(s));
}

}  // namespace robopose
