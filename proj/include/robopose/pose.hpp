#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robopose/trajectory.hpp"

namespace robopose {

/// Total-least-squares line through a point set, with the input order fixing orientation.
struct FittedSegment {
    Vec2 start;      // projection of the first input point
    Vec2 center;     // centroid (lies on the line)
    Vec2 end;        // projection of the last input point
    Vec2 direction;  // unit, start -> end
};

/// Principal-axis fit. Throws DegenerateInputError with fewer than two distinct points.
FittedSegment fit_segment(std::span<const Vec2> points);
FittedSegment fit_segment(std::span<const Point> points);

/// Same line with direction negated and start/end swapped.
FittedSegment reversed(const FittedSegment& seg);

/// Flips `seg` when its direction points against `reference`; a zero dot product keeps it.
FittedSegment oriented_along(const FittedSegment& seg, const Vec2& reference);

/// Fits the last min(window, n) points of the path, oriented tail -> head.
FittedSegment extract_head_segment(const PixelPath& robot_path, int window = 40);

/// First point of the head window, the "tail end" used for c_tail.
Point head_window_tail(const PixelPath& robot_path, int window = 40);

/// Skeleton pixel nearest to `p`; equal distances resolve to raster order.
/// Throws NotFoundError on an empty skeleton.
Point nearest_skeleton_pixel(const PixelGrid& skel, Point p);

/// Ordered points of the local vessel window: up to half_window pixels either
/// side of the pixel nearest to `head`, following the straightest continuation
/// at junctions.
std::vector<Point> vessel_window(const PixelGrid& vessel_skel, Point head, int half_window = 20);

/// Fit of vessel_window(); orientation follows the walk order (see oriented_along).
FittedSegment extract_vessel_segment(const PixelGrid& vessel_skel, Point head, int half_window = 20);

struct PoseParameters {
    double c_head = 0.0;
    double c_tail = 0.0;
    double d_head = 0.0;
    double d_tail = 0.0;
    /// Head and tail on opposite sides of the vessel line.
    bool s = false;
    double theta_deg = 0.0;
};

/// Head is robot_seg.end; the vessel line is (vessel_seg.center, vessel_seg.direction).
PoseParameters compute_pose(const FittedSegment& robot_seg, const Vec2& robot_tail_point, const FittedSegment& vessel_seg);

/// Builds parameters from signed offsets and an angle (used for truth and tests).
PoseParameters pose_from_offsets(double c_head, double c_tail, double theta_deg);

struct PoseThresholds {
    double d_allow = 10.0;
    double theta_allow_deg = 15.0;
};

struct SteeringConfig {
    double theta_max_deg = 90.0;
    double gain = 1.0;
};

enum class PoseLabel { A, B, C, D };
enum class SpeedHint { High, Reduced, Minimum, Moderate };

struct PoseState {
    PoseLabel label = PoseLabel::A;
    SpeedHint speed_hint = SpeedHint::High;
    double steering_deg = 0.0;
};

PoseState classify_state(const PoseParameters& p, const PoseThresholds& t = {}, const SteeringConfig& steering = {});

std::string_view to_string(PoseLabel label);
std::string_view to_string(SpeedHint hint);
/// Throws DomainError for anything other than "A".."D".
PoseLabel parse_label(std::string_view s);

}  // namespace robopose
