#pragma once

#include <json.hpp>

#include "robopose/config.hpp"

namespace robopose {

struct Perception {
    Point head;
    Point tail;
    PixelPath robot_path;
    FittedSegment robot_segment;
    FittedSegment vessel_segment;
    PoseParameters params;
    PoseState state;
    std::size_t candidate_count = 0;
};

/// Full per-frame chain: clean, skeletonize, repair the robot skeleton, trace
/// candidates from boundary endpoints, select, fit, classify.
/// Throws DomainError when the masks differ in size and NotFoundError when no
/// robot trajectory (or no vessel skeleton) is present.
Perception perceive(const PixelGrid& vessel_mask, const PixelGrid& robot_mask, const PipelineConfig& cfg = {});

/// {head, c_head, c_tail, d_head, d_tail, s, theta_deg, state, speed_hint, steering_deg}
nlohmann::ordered_json pose_report(const Perception& p);

}  // namespace robopose
