#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "robopose/grid.hpp"
#include "robopose/pose.hpp"

namespace robopose::phantom {

/// Name recorded in corpus metadata; the engine is std::mt19937_64 and all
/// variates are derived from its raw 64-bit output, so corpora reproduce
/// across standard libraries.
inline constexpr const char* kRngName = "mt19937_64";

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi].
    int uniform_int(int lo, int hi);
    /// Standard normal via Box-Muller.
    double normal();
    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 mix of (base, stream) for independent per-record seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Uniform Catmull-Rom spline through control points, t in [0, n - 1].
class Centerline {
public:
    explicit Centerline(std::vector<Vec2> control_points);

    double max_param() const { return static_cast<double>(cp_.size() - 1); }
    Vec2 eval(double t) const;
    Vec2 derivative(double t) const;
    Vec2 tangent(double t) const { return derivative(t).normalized(); }
    /// Unit normal with cross(tangent, normal) = +1.
    Vec2 normal(double t) const;

    double length() const { return arc_.back(); }
    /// Arc length at parameter t and its inverse (table interpolation over fine samples).
    double arc_at(double t) const;
    double param_at_arc(double s) const;

    /// Parameter of the closest curve point (dense search + golden-section refinement).
    double nearest_param(const Vec2& p) const;

    std::span<const Vec2> samples() const { return samples_; }

private:
    std::vector<Vec2> cp_;
    std::vector<double> params_;
    std::vector<Vec2> samples_;
    std::vector<double> arc_;
};

struct Defect {
    enum class Kind { Gap, Branch, Outlier, Speckle };
    Kind kind = Kind::Gap;
    /// Gap/branch: length in pixels. Outlier: area in pixels. Speckle: blob count.
    double amount = 0.0;

    friend bool operator==(const Defect&, const Defect&) = default;
};

std::string to_string(Defect::Kind kind);
Defect::Kind parse_defect_kind(const std::string& s);

struct PhantomSpec {
    int width = 320;
    int height = 240;
    std::vector<Vec2> vessel_control_points;
    double vessel_radius = 24.0;
    /// Signed perpendicular offset of the head from the centerline.
    double robot_offset = 0.0;
    /// Head direction relative to the vessel tangent, positive towards the normal.
    double robot_angle_deg = 0.0;
    /// Centerline arc length from where the vessel enters the image to the head's foot point.
    double robot_length = 160.0;
    double robot_radius = 1.5;
    /// Straight section ending at the head; must cover the 40-pixel head window.
    double head_straight_length = 58.0;
    /// Lateral offset of the robot body where it enters the image.
    double entry_offset = 0.0;
    std::vector<Defect> defects;
    std::uint64_t seed = 0;
};

struct PhantomTruth {
    Vec2 head;
    Vec2 tail;
    Vec2 entry;
    Vec2 vessel_tangent;   // oriented along travel
    Vec2 robot_direction;  // unit, towards the head
    double theta_true = 0.0;
    double c_head_true = 0.0;
    double c_tail_true = 0.0;
    double d_head_true = 0.0;
    double d_tail_true = 0.0;
    bool s_true = false;
    PoseLabel state_true = PoseLabel::A;
};

struct TruthConfig {
    PoseThresholds thresholds;
    /// Points in the head window used by the pipeline.
    int head_window = 40;
};

struct AppliedDefect {
    Defect defect;
    Vec2 location;
    /// Inclusive bounding box of changed pixels; empty (x0 > x1) when nothing changed.
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
};

struct Phantom {
    PixelGrid vessel_mask;
    PixelGrid robot_mask;
    /// Robot mask before defects.
    PixelGrid clean_robot_mask;
    PhantomTruth truth;
    std::vector<Vec2> robot_curve;
    std::vector<AppliedDefect> applied_defects;
};

/// Analytic geometry and truth only, no rasterisation. Throws SpecError when the
/// robot leaves the vessel or the head is too close to the image edge.
struct Scene {
    PhantomTruth truth;
    std::vector<Vec2> robot_curve;
    std::vector<Vec2> vessel_curve;
};
Scene build_scene(const PhantomSpec& spec, const TruthConfig& cfg = {});

Phantom generate(const PhantomSpec& spec, const TruthConfig& cfg = {});

/// Foreground = pixel centres within `radius` of the polyline.
PixelGrid rasterize_tube(int width, int height, std::span<const Vec2> polyline, double radius);

struct DefectContext {
    /// Polyline along the object; derived from the mask's principal axis when empty.
    std::vector<Vec2> guide;
    double stroke_radius = 1.5;
    /// Keep-out distance from the image border for grafted/added strokes.
    double border_clearance = 12.0;
};

struct DefectResult {
    PixelGrid mask;
    std::vector<AppliedDefect> applied;
};

/// Gap: erase a band `amount` long across the guide at 30-70% of its length.
/// Branch: graft a stroke at 25-55% of the guide. Outlier: disconnected stroke
/// of roughly `amount` pixels at least 20 px from existing foreground.
/// Speckle: `amount` blobs of at most 9 pixels, isolated from all foreground.
DefectResult inject_defects(const PixelGrid& mask, std::span<const Defect> defects, std::uint64_t seed,
                            const DefectContext& ctx = {});

struct RenderConfig {
    double background = 170.0;
    double texture_amplitude = 12.0;
    double vessel_level = 90.0;
    double robot_level = 235.0;
    double noise_sigma = 6.0;
};

/// Throws DomainError when the masks differ in size.
GrayImage render_frame(const PixelGrid& vessel_mask, const PixelGrid& robot_mask, std::uint64_t seed,
                       const RenderConfig& cfg = {});

struct DefectSettings {
    double gap_probability = 0.0;
    double gap_min = 3.0, gap_max = 6.0;
    double branch_probability = 0.0;
    double branch_min = 10.0, branch_max = 18.0;
    double outlier_probability = 0.0;
    double outlier_min = 80.0, outlier_max = 150.0;
    double speckle_probability = 0.0;
    int speckle_min = 5, speckle_max = 15;
    /// Every phantom receives at least one of gap/branch/outlier when any has probability > 0.
    bool at_least_one = true;
};

struct CorpusSettings {
    int width = 320;
    int height = 240;
    double vessel_radius_min = 22.0;
    double vessel_radius_max = 28.0;
    double robot_radius = 1.5;
    /// Maximum scene rotation in degrees; half the scenes are also turned by 180.
    double rotation_max_deg = 30.0;
    /// Lateral control-point jitter as a fraction of the image height.
    double bend = 0.10;
    std::vector<PoseLabel> states{PoseLabel::A, PoseLabel::B, PoseLabel::C, PoseLabel::D};
    /// Truth must keep its label under c_head/c_tail +/- margin_px and theta +/- margin_deg.
    double margin_px = 2.5;
    double margin_deg = 3.0;
    TruthConfig truth;
    DefectSettings defects;
    RenderConfig render;
};

/// Draws a spec whose truth is `target` with the configured decision margin.
/// Throws SpecError if no such spec is found within the attempt budget.
PhantomSpec sample_spec(const CorpusSettings& settings, std::uint64_t seed, PoseLabel target);

/// Label for record `index` when cycling through settings.states.
PoseLabel target_state(const CorpusSettings& settings, std::size_t index);

/// True when the label survives every perturbation in the margin box.
bool robust_label(const PhantomTruth& truth, const TruthConfig& cfg, double margin_px, double margin_deg);

}  // namespace robopose::phantom
