#include "robopose/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace robopose::phantom {

int Rng::uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
    return lo + static_cast<int>(next() % span);
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Centerline

namespace {

constexpr int kSamplesPerSegment = 512;

Vec2 rotate(const Vec2& v, double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace

Centerline::Centerline(std::vector<Vec2> control_points) : cp_(std::move(control_points)) {
    if (cp_.size() < 2) throw SpecError("centerline needs at least two control points");
    for (std::size_t i = 1; i < cp_.size(); ++i) {
        if (cp_[i] == cp_[i - 1]) throw SpecError("repeated centerline control point");
    }
    const std::size_t segs = cp_.size() - 1;
    const std::size_t n = segs * kSamplesPerSegment + 1;
    params_.resize(n);
    samples_.resize(n);
    arc_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        params_[i] = static_cast<double>(i) / kSamplesPerSegment;
        samples_[i] = eval(params_[i]);
        arc_[i] = i == 0 ? 0.0 : arc_[i - 1] + (samples_[i] - samples_[i - 1]).norm();
    }
}

namespace {

struct SegmentPoints {
    Vec2 p0, p1, p2, p3;
    double u;
};

}  // namespace

static SegmentPoints segment_at(const std::vector<Vec2>& cp, double t) {
    const std::size_t n = cp.size();
    t = std::clamp(t, 0.0, static_cast<double>(n - 1));
    std::size_t i = static_cast<std::size_t>(std::floor(t));
    if (i >= n - 1) i = n - 2;
    const double u = t - static_cast<double>(i);
    auto at = [&](std::ptrdiff_t k) -> Vec2 {
        if (k < 0) return cp[0] * 2.0 - cp[1];
        if (k >= static_cast<std::ptrdiff_t>(n)) return cp[n - 1] * 2.0 - cp[n - 2];
        return cp[static_cast<std::size_t>(k)];
    };
    const auto k = static_cast<std::ptrdiff_t>(i);
    return {at(k - 1), at(k), at(k + 1), at(k + 2), u};
}

Vec2 Centerline::eval(double t) const {
    const auto [p0, p1, p2, p3, u] = segment_at(cp_, t);
    const double u2 = u * u, u3 = u2 * u;
    return (p1 * 2.0 + (p2 - p0) * u + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2 +
            (p1 * 3.0 - p0 - p2 * 3.0 + p3) * u3) *
           0.5;
}

Vec2 Centerline::derivative(double t) const {
    const auto [p0, p1, p2, p3, u] = segment_at(cp_, t);
    return ((p2 - p0) + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * (2.0 * u) + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * (3.0 * u * u)) *
           0.5;
}

Vec2 Centerline::normal(double t) const {
    const Vec2 tg = tangent(t);
    return {-tg.y, tg.x};
}

double Centerline::arc_at(double t) const {
    const double x = std::clamp(t, 0.0, max_param()) * kSamplesPerSegment;
    const auto i = std::min(static_cast<std::size_t>(x), arc_.size() - 2);
    const double f = x - static_cast<double>(i);
    return arc_[i] + f * (arc_[i + 1] - arc_[i]);
}

double Centerline::param_at_arc(double s) const {
    s = std::clamp(s, 0.0, length());
    const auto it = std::lower_bound(arc_.begin(), arc_.end(), s);
    if (it == arc_.begin()) return 0.0;
    const auto i = static_cast<std::size_t>(it - arc_.begin());
    const double a0 = arc_[i - 1], a1 = arc_[i];
    const double f = a1 > a0 ? (s - a0) / (a1 - a0) : 0.0;
    return params_[i - 1] + f * (params_[i] - params_[i - 1]);
}

double Centerline::nearest_param(const Vec2& p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const Vec2 d = samples_[i] - p;
        const double d2 = d.x * d.x + d.y * d.y;
        if (d2 < best_d) {
            best_d = d2;
            best = i;
        }
    }
    double lo = params_[best > 0 ? best - 1 : 0];
    double hi = params_[std::min(best + 1, params_.size() - 1)];
    auto dist2 = [&](double t) {
        const Vec2 d = eval(t) - p;
        return d.x * d.x + d.y * d.y;
    };
    constexpr double kInvPhi = 0.6180339887498949;
    double a = hi - kInvPhi * (hi - lo);
    double b = lo + kInvPhi * (hi - lo);
    double fa = dist2(a), fb = dist2(b);
    for (int it = 0; it < 80; ++it) {
        if (fa < fb) {
            hi = b; b = a; fb = fa;
            a = hi - kInvPhi * (hi - lo);
            fa = dist2(a);
        } else {
            lo = a; a = b; fa = fb;
            b = lo + kInvPhi * (hi - lo);
            fb = dist2(b);
        }
    }
    return 0.5 * (lo + hi);
}

std::string to_string(Defect::Kind kind) {
    switch (kind) {
        case Defect::Kind::Gap: return "gap";
        case Defect::Kind::Branch: return "branch";
        case Defect::Kind::Outlier: return "outlier";
        case Defect::Kind::Speckle: return "speckle";
    }
    return "?";
}

Defect::Kind parse_defect_kind(const std::string& s) {
    if (s == "gap") return Defect::Kind::Gap;
    if (s == "branch") return Defect::Kind::Branch;
    if (s == "outlier") return Defect::Kind::Outlier;
    if (s == "speckle") return Defect::Kind::Speckle;
    throw SpecError("unknown defect kind: " + s);
}

// ---------------------------------------------------------------------------
// Scene geometry and truth

namespace {

struct VisibleRange {
    double s_in = 0.0;
    double s_out = 0.0;
};

VisibleRange visible_range(const Centerline& c, int w, int h) {
    const auto samples = c.samples();
    bool found = false;
    VisibleRange r;
    double s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0) s += (samples[i] - samples[i - 1]).norm();
        const Vec2& p = samples[i];
        const bool inside = p.x >= 0.0 && p.y >= 0.0 && p.x <= w - 1.0 && p.y <= h - 1.0;
        if (!inside) continue;
        if (!found) r.s_in = s;
        r.s_out = s;
        found = true;
    }
    if (!found) throw SpecError("vessel centerline does not cross the image");
    return r;
}

double min_window_length(int head_window) { return (head_window - 1) * std::sqrt(2.0) + 1.0; }

}  // namespace

Scene build_scene(const PhantomSpec& spec, const TruthConfig& cfg) {
    if (spec.width < 1 || spec.height < 1) throw SpecError("image size must be positive");
    if (!(spec.vessel_radius > 0.0) || !(spec.robot_radius > 0.0)) throw SpecError("radii must be positive");
    if (!(std::abs(spec.robot_offset) < spec.vessel_radius)) throw SpecError("|robot_offset| must be < vessel_radius");
    if (spec.head_straight_length < min_window_length(cfg.head_window)) {
        throw SpecError("head_straight_length shorter than the head window");
    }

    const Centerline line(spec.vessel_control_points);
    const auto vis = visible_range(line, spec.width, spec.height);
    const double s_start = std::max(0.0, vis.s_in - 8.0);
    const double s_head = vis.s_in + spec.robot_length;
    if (s_head > vis.s_out - 60.0) throw SpecError("robot head too close to where the vessel leaves the image");

    const double t_head = line.param_at_arc(s_head);
    const Vec2 foot = line.eval(t_head);
    const Vec2 tangent = line.tangent(t_head);
    const Vec2 normal = line.normal(t_head);
    const double alpha = deg_to_rad(spec.robot_angle_deg);
    const Vec2 head = foot + normal * spec.robot_offset;
    const Vec2 u_r = tangent * std::cos(alpha) + normal * std::sin(alpha);
    const Vec2 knee = head - u_r * spec.head_straight_length;

    const double t_knee = line.nearest_param(knee);
    const double s_knee = line.arc_at(t_knee);
    if (s_knee < s_start + 10.0) throw SpecError("robot too short for its straight head section");
    const double knee_offset = cross(line.tangent(t_knee), knee - line.eval(t_knee));

    const double limit = spec.vessel_radius - spec.robot_radius - 1.0;
    Scene scene;
    auto& curve = scene.robot_curve;
    const double body_len = s_knee - s_start;
    const int body_steps = std::max(1, static_cast<int>(std::ceil(body_len / 0.5)));
    for (int i = 0; i < body_steps; ++i) {
        const double f = static_cast<double>(i) / body_steps;
        const double t = line.param_at_arc(s_start + f * body_len);
        const double o = spec.entry_offset + (knee_offset - spec.entry_offset) * f;
        if (std::abs(o) > limit) throw SpecError("robot body leaves the vessel");
        curve.push_back(line.eval(t) + line.normal(t) * o);
    }
    const int straight_steps = std::max(1, static_cast<int>(std::ceil(spec.head_straight_length / 0.5)));
    for (int i = 0; i <= straight_steps; ++i) {
        const double f = static_cast<double>(i) / straight_steps;
        const Vec2 p = knee + (head - knee) * f;
        const Vec2 d = line.eval(line.nearest_param(p)) - p;
        if (d.norm() > limit) throw SpecError("robot head section leaves the vessel");
        curve.push_back(p);
    }

    constexpr double kEdge = 8.0;
    for (const Vec2& p : {head, knee}) {
        if (p.x < kEdge || p.y < kEdge || p.x > spec.width - 1 - kEdge || p.y > spec.height - 1 - kEdge) {
            throw SpecError("robot head section too close to the image edge");
        }
    }

    // Entry: first robot point inside the image.
    Vec2 entry = curve.front();
    for (const Vec2& p : curve) {
        if (p.x >= 0.0 && p.y >= 0.0 && p.x <= spec.width - 1.0 && p.y <= spec.height - 1.0) {
            entry = p;
            break;
        }
    }

    PhantomTruth& tr = scene.truth;
    const double t_near = line.nearest_param(head);
    const Vec2 near = line.eval(t_near);
    Vec2 t_v = line.tangent(t_near);
    if (dot(t_v, head - entry) < 0.0) t_v = -t_v;

    const double reach = (cfg.head_window - 1) / std::max(std::abs(u_r.x), std::abs(u_r.y));
    const Vec2 tail = head - u_r * reach;

    const PoseParameters params = pose_from_offsets(cross(t_v, head - near), cross(t_v, tail - near),
                                                    rad_to_deg(std::acos(std::clamp(dot(u_r, t_v), -1.0, 1.0))));
    tr.head = head;
    tr.tail = tail;
    tr.entry = entry;
    tr.vessel_tangent = t_v;
    tr.robot_direction = u_r;
    tr.theta_true = params.theta_deg;
    tr.c_head_true = params.c_head;
    tr.c_tail_true = params.c_tail;
    tr.d_head_true = params.d_head;
    tr.d_tail_true = params.d_tail;
    tr.s_true = params.s;
    tr.state_true = classify_state(params, cfg.thresholds).label;

    // Vessel polyline at roughly one-pixel spacing.
    const auto samples = line.samples();
    for (std::size_t i = 0; i < samples.size(); i += 2) scene.vessel_curve.push_back(samples[i]);
    if (scene.vessel_curve.back() != samples.back()) scene.vessel_curve.push_back(samples.back());
    return scene;
}

PixelGrid rasterize_tube(int width, int height, std::span<const Vec2> polyline, double radius) {
    PixelGrid grid(width, height);
    if (polyline.empty()) return grid;
    const double r2 = radius * radius;
    auto stamp_segment = [&](const Vec2& a, const Vec2& b) {
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius)));
        const Vec2 ab = b - a;
        const double len2 = dot(ab, ab);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p(x, y);
                const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
                const Vec2 d = p - (a + ab * t);
                if (d.x * d.x + d.y * d.y <= r2) grid.set(x, y);
            }
        }
    };
    if (polyline.size() == 1) stamp_segment(polyline[0], polyline[0]);
    for (std::size_t i = 1; i < polyline.size(); ++i) stamp_segment(polyline[i - 1], polyline[i]);
    return grid;
}

Phantom generate(const PhantomSpec& spec, const TruthConfig& cfg) {
    Scene scene = build_scene(spec, cfg);
    Phantom out;
    out.vessel_mask = rasterize_tube(spec.width, spec.height, scene.vessel_curve, spec.vessel_radius);
    out.clean_robot_mask = rasterize_tube(spec.width, spec.height, scene.robot_curve, spec.robot_radius);
    out.truth = scene.truth;
    out.robot_curve = std::move(scene.robot_curve);
    if (spec.defects.empty()) {
        out.robot_mask = out.clean_robot_mask;
        return out;
    }
    DefectContext ctx;
    ctx.guide = out.robot_curve;
    ctx.stroke_radius = spec.robot_radius;
    auto result = inject_defects(out.clean_robot_mask, spec.defects, derive_seed(spec.seed, 1), ctx);
    out.robot_mask = std::move(result.mask);
    out.applied_defects = std::move(result.applied);
    return out;
}

// ---------------------------------------------------------------------------
// Defects

namespace {

struct Guide {
    std::vector<Vec2> points;
    std::vector<double> arc;

    double length() const { return arc.back(); }

    std::pair<Vec2, Vec2> at_fraction(double f) const {
        const double s = f * length();
        const auto it = std::lower_bound(arc.begin(), arc.end(), s);
        std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - arc.begin()), 1, arc.size() - 1);
        const double a0 = arc[i - 1], a1 = arc[i];
        const double t = a1 > a0 ? (s - a0) / (a1 - a0) : 0.0;
        const Vec2 p = points[i - 1] + (points[i] - points[i - 1]) * t;
        return {p, (points[i] - points[i - 1]).normalized()};
    }
};

Guide make_guide(const PixelGrid& mask, const DefectContext& ctx) {
    Guide g;
    for (const Vec2& p : ctx.guide) {
        if (p.x >= 0.0 && p.y >= 0.0 && p.x <= mask.width() - 1.0 && p.y <= mask.height() - 1.0) {
            if (g.points.empty() || (p - g.points.back()).norm() > 1e-9) g.points.push_back(p);
        }
    }
    if (g.points.size() < 2) {
        // Principal axis of the foreground.
        const auto fg = mask.foreground();
        if (fg.size() < 2) throw SpecError("mask too small for defect injection");
        const auto seg = fit_segment(std::span<const Point>(fg));
        double lo = 0.0, hi = 0.0;
        for (const Point& p : fg) {
            const double t = dot(Vec2(p) - seg.center, seg.direction);
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        g.points.clear();
        const int n = std::max(1, static_cast<int>(std::ceil(hi - lo)));
        for (int i = 0; i <= n; ++i) g.points.push_back(seg.center + seg.direction * (lo + (hi - lo) * i / n));
    }
    g.arc.assign(g.points.size(), 0.0);
    for (std::size_t i = 1; i < g.points.size(); ++i) g.arc[i] = g.arc[i - 1] + (g.points[i] - g.points[i - 1]).norm();
    if (g.length() <= 0.0) throw SpecError("degenerate defect guide");
    return g;
}

bool inside_with_clearance(const PixelGrid& m, const Vec2& p, double c) {
    return p.x >= c && p.y >= c && p.x <= m.width() - 1 - c && p.y <= m.height() - 1 - c;
}

void stamp_stroke(PixelGrid& mask, std::span<const Vec2> pts, double radius) {
    const PixelGrid stroke = rasterize_tube(mask.width(), mask.height(), pts, radius);
    auto dst = mask.cells();
    const auto src = stroke.cells();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
}

double min_distance_to(const std::vector<Point>& fg, std::span<const Vec2> pts) {
    double best = std::numeric_limits<double>::max();
    for (const Vec2& q : pts) {
        for (const Point& p : fg) best = std::min(best, (Vec2(p) - q).norm());
    }
    return best;
}

void record_changes(const PixelGrid& before, const PixelGrid& after, AppliedDefect& rec) {
    for (int y = 0; y < before.height(); ++y) {
        for (int x = 0; x < before.width(); ++x) {
            if (before.at(x, y) == after.at(x, y)) continue;
            if (rec.x0 > rec.x1) {
                rec.x0 = rec.x1 = x;
                rec.y0 = rec.y1 = y;
            } else {
                rec.x0 = std::min(rec.x0, x);
                rec.x1 = std::max(rec.x1, x);
                rec.y0 = std::min(rec.y0, y);
                rec.y1 = std::max(rec.y1, y);
            }
        }
    }
}

// Gaps and branches keep this much arc length between them so each stays a
// separate failure case.
constexpr double kDefectSpacing = 25.0;

std::optional<double> pick_arc(const Guide& guide, Rng& rng, double lo, double hi, std::vector<double>& used) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const double f = rng.uniform(lo, hi);
        const double s = f * guide.length();
        if (std::all_of(used.begin(), used.end(), [&](double u) { return std::abs(u - s) >= kDefectSpacing; })) {
            return f;
        }
    }
    return std::nullopt;
}

void apply_gap(PixelGrid& mask, const Guide& guide, const Defect& d, Rng& rng, double stroke, std::vector<double>& used,
               AppliedDefect& rec) {
    if (d.amount >= guide.length()) throw SpecError("gap longer than the mask");
    const auto f = pick_arc(guide, rng, 0.3, 0.7, used);
    if (!f) throw SpecError("no room for another gap");
    used.push_back(*f * guide.length());
    const auto [g, t] = guide.at_fraction(*f);
    rec.location = g;
    const double half = 0.5 * d.amount;
    const double reach = half + stroke + 3.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(g.x - reach)));
    const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(g.x + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(g.y - reach)));
    const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(g.y + reach)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Vec2 rel = Vec2(x, y) - g;
            const double along = dot(rel, t);
            if (along >= -half && along < half && std::abs(cross(t, rel)) <= stroke + 2.5) mask.set(x, y, false);
        }
    }
}

void apply_branch(PixelGrid& mask, const Guide& guide, const Defect& d, Rng& rng, const DefectContext& ctx,
                  std::vector<double>& used, AppliedDefect& rec) {
    if (d.amount >= guide.length()) throw SpecError("branch longer than the mask");
    for (int attempt = 0; attempt < 200; ++attempt) {
        const auto f = pick_arc(guide, rng, 0.25, 0.55, used);
        if (!f) break;
        const auto [g, t] = guide.at_fraction(*f);
        const double side = rng.coin() ? 1.0 : -1.0;
        const Vec2 dir = rotate(t, side * deg_to_rad(rng.uniform(35.0, 65.0)));
        const Vec2 nrm{-dir.y, dir.x};
        const double bend = rng.uniform(-0.01, 0.01);
        std::vector<Vec2> pts;
        for (double s = 0.0; s <= d.amount + 1e-9; s += 0.5) pts.push_back(g + dir * s + nrm * (bend * s * s));
        if (!inside_with_clearance(mask, pts.back(), ctx.border_clearance)) continue;
        rec.location = g;
        used.push_back(*f * guide.length());
        stamp_stroke(mask, pts, ctx.stroke_radius);
        return;
    }
    throw SpecError("could not place branch inside the image");
}

void apply_outlier(PixelGrid& mask, const Defect& d, Rng& rng, const DefectContext& ctx, AppliedDefect& rec) {
    const double len = std::max(6.0, d.amount / (2.0 * ctx.stroke_radius + 1.0));
    const auto fg = mask.foreground();
    for (int attempt = 0; attempt < 500; ++attempt) {
        const Vec2 c{rng.uniform(0.0, mask.width() - 1.0), rng.uniform(0.0, mask.height() - 1.0)};
        const double ang = rng.uniform(0.0, kPi);
        const Vec2 dir{std::cos(ang), std::sin(ang)};
        std::vector<Vec2> pts;
        for (double s = -0.5 * len; s <= 0.5 * len + 1e-9; s += 0.5) pts.push_back(c + dir * s);
        if (!inside_with_clearance(mask, pts.front(), ctx.border_clearance) ||
            !inside_with_clearance(mask, pts.back(), ctx.border_clearance)) {
            continue;
        }
        if (min_distance_to(fg, pts) < 20.0) continue;
        rec.location = c;
        stamp_stroke(mask, pts, ctx.stroke_radius);
        return;
    }
    throw SpecError("could not place outlier segment");
}

void apply_speckle(PixelGrid& mask, const Defect& d, Rng& rng, AppliedDefect& rec) {
    const int count = static_cast<int>(std::lround(d.amount));
    if (count < 0) throw SpecError("speckle count must be >= 0");
    for (int k = 0; k < count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
            const double r = rng.uniform(0.6, 1.5);
            const Vec2 c{rng.uniform(3.0, mask.width() - 4.0), rng.uniform(3.0, mask.height() - 4.0)};
            // Blob pixels lie within 1.5 px of c; keep every existing pixel 4 px beyond that.
            bool clear = true;
            const int reach = 6;
            const int cx = static_cast<int>(std::lround(c.x)), cy = static_cast<int>(std::lround(c.y));
            for (int y = cy - reach; y <= cy + reach && clear; ++y) {
                for (int x = cx - reach; x <= cx + reach; ++x) {
                    if (mask.get(x, y) && (Vec2(x, y) - c).norm() < 1.5 + 4.0) {
                        clear = false;
                        break;
                    }
                }
            }
            if (!clear) continue;
            mask.set(cx, cy);
            for (int y = cy - 2; y <= cy + 2; ++y) {
                for (int x = cx - 2; x <= cx + 2; ++x) {
                    if (mask.in_bounds(x, y) && (Vec2(x, y) - c).norm() <= r) mask.set(x, y);
                }
            }
            if (k == 0) rec.location = c;
            placed = true;
        }
        if (!placed) throw SpecError("could not place speckle");
    }
}

}  // namespace

DefectResult inject_defects(const PixelGrid& mask, std::span<const Defect> defects, std::uint64_t seed,
                            const DefectContext& ctx) {
    DefectResult out{mask, {}};
    if (defects.empty()) return out;
    const Guide guide = make_guide(mask, ctx);
    Rng rng(seed);
    std::vector<double> used;
    for (const Defect& d : defects) {
        if (!(d.amount >= 0.0)) throw SpecError("defect amount must be >= 0");
        AppliedDefect rec{d, {}, 0, 0, -1, -1};
        const PixelGrid before = out.mask;
        switch (d.kind) {
            case Defect::Kind::Gap: apply_gap(out.mask, guide, d, rng, ctx.stroke_radius, used, rec); break;
            case Defect::Kind::Branch: apply_branch(out.mask, guide, d, rng, ctx, used, rec); break;
            case Defect::Kind::Outlier: apply_outlier(out.mask, d, rng, ctx, rec); break;
            case Defect::Kind::Speckle: apply_speckle(out.mask, d, rng, rec); break;
        }
        record_changes(before, out.mask, rec);
        out.applied.push_back(rec);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frames

GrayImage render_frame(const PixelGrid& vessel_mask, const PixelGrid& robot_mask, std::uint64_t seed,
                       const RenderConfig& cfg) {
    if (vessel_mask.width() != robot_mask.width() || vessel_mask.height() != robot_mask.height()) {
        throw DomainError("vessel and robot masks differ in size");
    }
    Rng rng(seed);
    const double fx = rng.uniform(1.0 / 180.0, 1.0 / 60.0);
    const double fy = rng.uniform(1.0 / 180.0, 1.0 / 60.0);
    const double px = rng.uniform(0.0, 2.0 * kPi);
    const double py = rng.uniform(0.0, 2.0 * kPi);

    const int w = vessel_mask.width(), h = vessel_mask.height();
    GrayImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double tex = cfg.texture_amplitude * std::sin(2.0 * kPi * fx * x + px) * std::cos(2.0 * kPi * fy * y + py);
            double v = cfg.background + tex;
            if (vessel_mask.at(x, y)) v = cfg.vessel_level + 0.3 * tex;
            if (robot_mask.at(x, y)) v = cfg.robot_level;
            if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * rng.normal();
            img.pixels[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// Sampling

bool robust_label(const PhantomTruth& truth, const TruthConfig& cfg, double margin_px, double margin_deg) {
    const PoseLabel want = truth.state_true;
    for (int i = -2; i <= 2; ++i) {
        for (int j = -2; j <= 2; ++j) {
            for (int k = -2; k <= 2; ++k) {
                const auto p = pose_from_offsets(truth.c_head_true + 0.5 * i * margin_px, truth.c_tail_true + 0.5 * j * margin_px,
                                                 std::max(0.0, truth.theta_true + 0.5 * k * margin_deg));
                if (classify_state(p, cfg.thresholds).label != want) return false;
            }
        }
    }
    return true;
}

PoseLabel target_state(const CorpusSettings& settings, std::size_t index) {
    if (settings.states.empty()) throw SpecError("corpus state list is empty");
    return settings.states[index % settings.states.size()];
}

namespace {

std::vector<Vec2> sample_control_points(const CorpusSettings& s, Rng& rng) {
    const double w = s.width, h = s.height;
    const double half_span = 0.5 * std::hypot(w, h) + 60.0;
    const double psi = deg_to_rad(rng.uniform(-s.rotation_max_deg, s.rotation_max_deg)) + (rng.coin() ? kPi : 0.0);
    const Vec2 centre{0.5 * w + rng.uniform(-0.08, 0.08) * w, 0.5 * h + rng.uniform(-0.08, 0.08) * h};
    std::vector<Vec2> cps;
    constexpr int kPoints = 5;
    for (int i = 0; i < kPoints; ++i) {
        const double x = -half_span + 2.0 * half_span * i / (kPoints - 1);
        const double y = rng.uniform(-s.bend, s.bend) * h;
        cps.push_back(centre + rotate({x, y}, psi));
    }
    return cps;
}

std::vector<Defect> sample_defects(const DefectSettings& d, Rng& rng) {
    std::vector<Defect> out;
    const bool any_structural = d.gap_probability > 0.0 || d.branch_probability > 0.0 || d.outlier_probability > 0.0;
    for (int tries = 0; tries < 100; ++tries) {
        out.clear();
        if (rng.uniform() < d.gap_probability) out.push_back({Defect::Kind::Gap, rng.uniform(d.gap_min, d.gap_max)});
        if (rng.uniform() < d.branch_probability) out.push_back({Defect::Kind::Branch, rng.uniform(d.branch_min, d.branch_max)});
        if (rng.uniform() < d.outlier_probability) out.push_back({Defect::Kind::Outlier, rng.uniform(d.outlier_min, d.outlier_max)});
        if (!out.empty() || !d.at_least_one || !any_structural) break;
    }
    if (rng.uniform() < d.speckle_probability) {
        out.push_back({Defect::Kind::Speckle, static_cast<double>(rng.uniform_int(d.speckle_min, d.speckle_max))});
    }
    return out;
}

}  // namespace

PhantomSpec sample_spec(const CorpusSettings& settings, std::uint64_t seed, PoseLabel target) {
    Rng rng(seed);
    const double r = settings.robot_radius;
    for (int attempt = 0; attempt < 2000; ++attempt) {
        PhantomSpec spec;
        spec.width = settings.width;
        spec.height = settings.height;
        spec.robot_radius = r;
        spec.vessel_control_points = sample_control_points(settings, rng);
        spec.vessel_radius = rng.uniform(settings.vessel_radius_min, settings.vessel_radius_max);
        spec.head_straight_length = std::max(spec.head_straight_length, min_window_length(settings.truth.head_window) + 2.0);

        const Centerline line(spec.vessel_control_points);
        VisibleRange vis;
        try {
            vis = visible_range(line, spec.width, spec.height);
        } catch (const SpecError&) {
            continue;
        }
        spec.robot_length = rng.uniform(0.42, 0.62) * (vis.s_out - vis.s_in);
        const double usable = spec.vessel_radius - r - 3.0;
        spec.entry_offset = rng.uniform(-0.4, 0.4) * usable;

        const double sign = rng.coin() ? 1.0 : -1.0;
        double c_head = 0.0, c_tail = 0.0;
        switch (target) {
            case PoseLabel::A:
                c_head = rng.uniform(-7.0, 7.0);
                c_tail = rng.uniform(-7.0, 7.0);
                break;
            case PoseLabel::B:
                c_head = sign * rng.uniform(1.5, 8.0);
                c_tail = -sign * rng.uniform(std::abs(c_head) + 3.0, usable);
                break;
            case PoseLabel::C:
                c_head = sign * rng.uniform(6.0, usable);
                c_tail = -sign * rng.uniform(2.5, std::max(2.5, std::abs(c_head) - 3.0));
                break;
            case PoseLabel::D:
                c_head = sign * rng.uniform(3.0, usable);
                c_tail = sign * rng.uniform(2.5, usable);
                break;
        }
        spec.robot_offset = c_head;

        // Angle that puts the head-window tail at c_tail: c_tail = c_head - reach * sin(alpha).
        const double t_head = line.param_at_arc(vis.s_in + spec.robot_length);
        const Vec2 tg = line.tangent(t_head);
        const Vec2 nm = line.normal(t_head);
        double sin_a = 0.0;
        for (int it = 0; it < 3; ++it) {
            const double cos_a = std::sqrt(std::max(0.0, 1.0 - sin_a * sin_a));
            const Vec2 u = tg * cos_a + nm * sin_a;
            const double reach = (settings.truth.head_window - 1) / std::max(std::abs(u.x), std::abs(u.y));
            sin_a = (c_head - c_tail) / reach;
            if (std::abs(sin_a) > std::sin(deg_to_rad(40.0))) break;
        }
        if (std::abs(sin_a) > std::sin(deg_to_rad(40.0))) continue;
        spec.robot_angle_deg = rad_to_deg(std::asin(sin_a));

        Scene scene;
        try {
            scene = build_scene(spec, settings.truth);
        } catch (const SpecError&) {
            continue;
        }
        if (scene.truth.state_true != target) continue;
        if (!robust_label(scene.truth, settings.truth, settings.margin_px, settings.margin_deg)) continue;

        spec.seed = derive_seed(seed, 7);
        // Redraw defects until they fit this scene.
        for (int tries = 0; tries < 20; ++tries) {
            spec.defects = sample_defects(settings.defects, rng);
            if (spec.defects.empty()) return spec;
            try {
                generate(spec, settings.truth);
                return spec;
            } catch (const SpecError&) {
            }
        }
    }
    throw SpecError("no phantom spec satisfies the requested state");
}

}  // namespace robopose::phantom
