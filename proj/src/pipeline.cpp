#include "robopose/pipeline.hpp"

namespace robopose {

Perception perceive(const PixelGrid& vessel_mask, const PixelGrid& robot_mask, const PipelineConfig& cfg) {
    if (vessel_mask.width() != robot_mask.width() || vessel_mask.height() != robot_mask.height()) {
        throw DomainError("vessel and robot masks differ in size");
    }

    Skeleton robot = skeletonize(clean_mask(robot_mask, cfg.clean));
    robot.grid = connect_gaps(prune_spurs(robot.grid, cfg.robot_spur_length), cfg.gap);
    robot.endpoints = detect_endpoints(robot.grid);

    std::vector<PixelPath> candidates;
    for (const Point& s : find_start_points(robot, cfg.trace)) candidates.push_back(trace_paths(robot, s, cfg.trace));
    if (candidates.empty()) throw NotFoundError("no robot trajectory found");

    Perception out;
    out.candidate_count = candidates.size();
    auto sel = select_optimal_path(candidates, cfg.trace.weights);
    if (sel.path.size() < 2) throw NotFoundError("robot trajectory too short");
    out.head = sel.head;
    out.robot_path = std::move(sel.path);
    out.robot_segment = extract_head_segment(out.robot_path, cfg.head_window);
    out.tail = head_window_tail(out.robot_path, cfg.head_window);

    const PixelGrid vessel = prune_spurs(skeletonize(clean_mask(vessel_mask, cfg.clean)).grid, cfg.vessel_spur_length);
    const auto vessel_seg = extract_vessel_segment(vessel, out.head, cfg.vessel_half_window);
    out.vessel_segment = oriented_along(vessel_seg, Vec2(out.head) - Vec2(out.robot_path.front()));

    out.params = compute_pose(out.robot_segment, Vec2(out.tail), out.vessel_segment);
    out.state = classify_state(out.params, cfg.thresholds, cfg.steering);
    return out;
}

nlohmann::ordered_json pose_report(const Perception& p) {
    return nlohmann::ordered_json{
        {"head", {p.head.x, p.head.y}},
        {"c_head", p.params.c_head},
        {"c_tail", p.params.c_tail},
        {"d_head", p.params.d_head},
        {"d_tail", p.params.d_tail},
        {"s", p.params.s},
        {"theta_deg", p.params.theta_deg},
        {"state", std::string(to_string(p.state.label))},
        {"speed_hint", std::string(to_string(p.state.speed_hint))},
        {"steering_deg", p.state.steering_deg},
    };
}

}  // namespace robopose
