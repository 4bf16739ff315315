#include <gtest/gtest.h>

#include "robopose/pipeline.hpp"

using namespace robopose;

TEST(Perceive, StraightPhantomIsStateA) {
    phantom::PhantomSpec s;
    s.vessel_control_points = {{-40, 120}, {80, 120}, {200, 120}, {360, 120}};
    const auto ph = phantom::generate(s);
    const Perception p = perceive(ph.vessel_mask, ph.robot_mask);
    EXPECT_EQ(p.state.label, PoseLabel::A);
    EXPECT_LE((Vec2(p.head) - ph.truth.head).norm(), 3.0);
    EXPECT_LT(p.params.theta_deg, 3.0);
    const auto r = pose_report(p);
    EXPECT_EQ(r["state"], "A");
    EXPECT_EQ(r["speed_hint"], "high");
}

TEST(Perceive, SampledScenesRecoverTruth) {
    phantom::CorpusSettings cs;
    int within = 0;
    for (std::uint64_t i = 0; i < 24; ++i) {
        const auto spec = phantom::sample_spec(cs, phantom::derive_seed(99, i), phantom::target_state(cs, i));
        const auto ph = phantom::generate(spec, cs.truth);
        const Perception p = perceive(ph.vessel_mask, ph.robot_mask);
        within += (Vec2(p.head) - ph.truth.head).norm() <= 3.0;
        EXPECT_NEAR(p.params.theta_deg, ph.truth.theta_true, 4.0) << i;
        EXPECT_EQ(p.state.label, ph.truth.state_true) << i;
    }
    EXPECT_EQ(within, 24);
}

TEST(Perceive, HeadFitMatchesAnalyticTangent) {
    phantom::CorpusSettings cs;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto spec = phantom::sample_spec(cs, 500 + i, phantom::target_state(cs, i));
        const auto ph = phantom::generate(spec, cs.truth);
        const Perception p = perceive(ph.vessel_mask, ph.robot_mask);
        const double c = dot(p.robot_segment.direction, ph.truth.robot_direction);
        EXPECT_LT(rad_to_deg(std::acos(std::clamp(c, -1.0, 1.0))), 3.0) << i;
        const double v = std::abs(dot(p.vessel_segment.direction, ph.truth.vessel_tangent));
        EXPECT_LT(rad_to_deg(std::acos(std::clamp(v, -1.0, 1.0))), 3.0) << i;
    }
}

TEST(Perceive, Errors) {
    PixelGrid v(50, 40), r(50, 40);
    for (int x = 0; x < 50; ++x)
        for (int y = 10; y < 30; ++y) v.set(x, y);
    EXPECT_THROW(perceive(v, r), NotFoundError);
    EXPECT_THROW(perceive(v, PixelGrid(10, 10)), DomainError);
}
