#include "robopose/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace robopose {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads known keys of one JSON object and rejects the rest.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("section '" + name_ + "' must be an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& child(const char* key) {
        used_.insert(key);
        return j_.at(key);
    }

    template <class T>
    void read(const char* key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw ConfigError("");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw ConfigError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError("");
            }
            out = v.get<T>();
        } catch (const std::exception&) {
            throw ConfigError("bad value for '" + name_ + "." + key + "'");
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
        }
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
bool probability(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::vector<std::string> label_names(const std::vector<PoseLabel>& states) {
    std::vector<std::string> out;
    for (PoseLabel l : states) out.emplace_back(to_string(l));
    return out;
}

void validate_corpus(const phantom::CorpusSettings& s) {
    require(s.width >= 64 && s.height >= 64, "phantom.width/height must be >= 64");
    require(finite_pos(s.vessel_radius_min) && s.vessel_radius_min <= s.vessel_radius_max &&
                std::isfinite(s.vessel_radius_max),
            "phantom vessel radius range invalid");
    require(finite_pos(s.robot_radius) && s.robot_radius < s.vessel_radius_min, "phantom.robot_radius invalid");
    require(finite_nonneg(s.rotation_max_deg) && s.rotation_max_deg <= 180.0, "phantom.rotation_max_deg invalid");
    require(finite_nonneg(s.bend) && s.bend <= 0.5, "phantom.bend must be in [0, 0.5]");
    require(!s.states.empty(), "phantom.states must not be empty");
    require(finite_nonneg(s.margin_px) && finite_nonneg(s.margin_deg), "phantom margins must be >= 0");
    const auto& d = s.defects;
    require(probability(d.gap_probability) && probability(d.branch_probability) && probability(d.outlier_probability) &&
                probability(d.speckle_probability),
            "defect probabilities must be in [0, 1]");
    require(finite_pos(d.gap_min) && d.gap_min <= d.gap_max, "defect gap range invalid");
    require(finite_pos(d.branch_min) && d.branch_min <= d.branch_max, "defect branch range invalid");
    require(finite_pos(d.outlier_min) && d.outlier_min <= d.outlier_max, "defect outlier range invalid");
    require(d.speckle_min >= 0 && d.speckle_min <= d.speckle_max, "defect speckle range invalid");
    const auto& r = s.render;
    for (double v : {r.background, r.vessel_level, r.robot_level}) require(v >= 0.0 && v <= 255.0, "render levels must be in [0, 255]");
    require(finite_nonneg(r.texture_amplitude) && finite_nonneg(r.noise_sigma), "render amplitudes must be >= 0");
}

}  // namespace

void PipelineConfig::validate() const {
    require(mask_threshold >= 0 && mask_threshold <= 255, "grid.mask_threshold must be in [0, 255]");
    require(finite_nonneg(gap.gap_threshold), "skeleton.gap_threshold must be >= 0");
    require(robot_spur_length >= 0 && vessel_spur_length >= 0, "skeleton spur lengths must be >= 0");
    require(trace.boundary_margin >= 0, "trajectory.boundary_margin must be >= 0");
    require(trace.max_depth >= 1, "trajectory.max_depth must be >= 1");
    require(std::isfinite(trace.weights.length) && std::isfinite(trace.weights.smoothness) &&
                std::isfinite(trace.weights.consistency),
            "trajectory.weights must be finite");
    require(head_window >= 2, "pose.head_window must be >= 2");
    require(vessel_half_window >= 1, "pose.vessel_half_window must be >= 1");
    require(finite_pos(thresholds.d_allow) && finite_pos(thresholds.theta_allow_deg), "pose thresholds must be > 0");
    require(finite_nonneg(steering.theta_max_deg) && std::isfinite(steering.gain), "pose steering invalid");
    validate_corpus(phantom);
}

ordered_json to_json(const phantom::CorpusSettings& s) {
    const auto& d = s.defects;
    const auto& r = s.render;
    return ordered_json{
        {"rng", phantom::kRngName},
        {"width", s.width},
        {"height", s.height},
        {"vessel_radius_min", s.vessel_radius_min},
        {"vessel_radius_max", s.vessel_radius_max},
        {"robot_radius", s.robot_radius},
        {"rotation_max_deg", s.rotation_max_deg},
        {"bend", s.bend},
        {"states", label_names(s.states)},
        {"margin_px", s.margin_px},
        {"margin_deg", s.margin_deg},
        {"defects",
         {{"gap_probability", d.gap_probability},
          {"gap_min", d.gap_min},
          {"gap_max", d.gap_max},
          {"branch_probability", d.branch_probability},
          {"branch_min", d.branch_min},
          {"branch_max", d.branch_max},
          {"outlier_probability", d.outlier_probability},
          {"outlier_min", d.outlier_min},
          {"outlier_max", d.outlier_max},
          {"speckle_probability", d.speckle_probability},
          {"speckle_min", d.speckle_min},
          {"speckle_max", d.speckle_max},
          {"at_least_one", d.at_least_one}}},
        {"render",
         {{"background", r.background},
          {"texture_amplitude", r.texture_amplitude},
          {"vessel_level", r.vessel_level},
          {"robot_level", r.robot_level},
          {"noise_sigma", r.noise_sigma}}},
    };
}

phantom::CorpusSettings corpus_settings_from_json(const json& doc) {
    phantom::CorpusSettings s;
    Section sec(doc, "phantom");
    std::string rng = phantom::kRngName;
    sec.read("rng", rng);
    require(rng == phantom::kRngName, std::string("phantom.rng must be '") + phantom::kRngName + "'");
    sec.read("width", s.width);
    sec.read("height", s.height);
    sec.read("vessel_radius_min", s.vessel_radius_min);
    sec.read("vessel_radius_max", s.vessel_radius_max);
    sec.read("robot_radius", s.robot_radius);
    sec.read("rotation_max_deg", s.rotation_max_deg);
    sec.read("bend", s.bend);
    if (sec.has("states")) {
        const json& st = sec.child("states");
        require(st.is_array(), "phantom.states must be an array");
        s.states.clear();
        for (const auto& v : st) {
            require(v.is_string(), "phantom.states entries must be strings");
            try {
                s.states.push_back(parse_label(v.get<std::string>()));
            } catch (const DomainError& e) {
                throw ConfigError(e.what());
            }
        }
    }
    sec.read("margin_px", s.margin_px);
    sec.read("margin_deg", s.margin_deg);
    if (sec.has("defects")) {
        Section d(sec.child("defects"), "phantom.defects");
        auto& o = s.defects;
        d.read("gap_probability", o.gap_probability);
        d.read("gap_min", o.gap_min);
        d.read("gap_max", o.gap_max);
        d.read("branch_probability", o.branch_probability);
        d.read("branch_min", o.branch_min);
        d.read("branch_max", o.branch_max);
        d.read("outlier_probability", o.outlier_probability);
        d.read("outlier_min", o.outlier_min);
        d.read("outlier_max", o.outlier_max);
        d.read("speckle_probability", o.speckle_probability);
        d.read("speckle_min", o.speckle_min);
        d.read("speckle_max", o.speckle_max);
        d.read("at_least_one", o.at_least_one);
        d.finish();
    }
    if (sec.has("render")) {
        Section r(sec.child("render"), "phantom.render");
        auto& o = s.render;
        r.read("background", o.background);
        r.read("texture_amplitude", o.texture_amplitude);
        r.read("vessel_level", o.vessel_level);
        r.read("robot_level", o.robot_level);
        r.read("noise_sigma", o.noise_sigma);
        r.finish();
    }
    sec.finish();
    validate_corpus(s);
    return s;
}

ordered_json to_json(const PipelineConfig& cfg) {
    return ordered_json{
        {"grid",
         {{"mask_threshold", cfg.mask_threshold},
          {"min_area", cfg.clean.min_area},
          {"max_hole_area", cfg.clean.max_hole_area}}},
        {"skeleton",
         {{"gap_threshold", cfg.gap.gap_threshold},
          {"robot_spur_length", cfg.robot_spur_length},
          {"vessel_spur_length", cfg.vessel_spur_length}}},
        {"trajectory",
         {{"boundary_margin", cfg.trace.boundary_margin},
          {"max_depth", cfg.trace.max_depth},
          {"weights",
           {{"length", cfg.trace.weights.length},
            {"smoothness", cfg.trace.weights.smoothness},
            {"consistency", cfg.trace.weights.consistency}}}}},
        {"pose",
         {{"head_window", cfg.head_window},
          {"vessel_half_window", cfg.vessel_half_window},
          {"d_allow", cfg.thresholds.d_allow},
          {"theta_allow_deg", cfg.thresholds.theta_allow_deg},
          {"steering_theta_max_deg", cfg.steering.theta_max_deg},
          {"steering_gain", cfg.steering.gain}}},
        {"phantom", to_json(cfg.phantom)},
    };
}

PipelineConfig config_from_json(const json& doc) {
    PipelineConfig cfg;
    Section root(doc, "config");
    if (root.has("grid")) {
        Section s(root.child("grid"), "grid");
        s.read("mask_threshold", cfg.mask_threshold);
        long min_area = static_cast<long>(cfg.clean.min_area), max_hole = static_cast<long>(cfg.clean.max_hole_area);
        s.read("min_area", min_area);
        s.read("max_hole_area", max_hole);
        require(min_area >= 0 && max_hole >= 0, "grid areas must be >= 0");
        cfg.clean.min_area = static_cast<std::size_t>(min_area);
        cfg.clean.max_hole_area = static_cast<std::size_t>(max_hole);
        s.finish();
    }
    if (root.has("skeleton")) {
        Section s(root.child("skeleton"), "skeleton");
        s.read("gap_threshold", cfg.gap.gap_threshold);
        s.read("robot_spur_length", cfg.robot_spur_length);
        s.read("vessel_spur_length", cfg.vessel_spur_length);
        s.finish();
    }
    if (root.has("trajectory")) {
        Section s(root.child("trajectory"), "trajectory");
        s.read("boundary_margin", cfg.trace.boundary_margin);
        s.read("max_depth", cfg.trace.max_depth);
        if (s.has("weights")) {
            Section w(s.child("weights"), "trajectory.weights");
            w.read("length", cfg.trace.weights.length);
            w.read("smoothness", cfg.trace.weights.smoothness);
            w.read("consistency", cfg.trace.weights.consistency);
            w.finish();
        }
        s.finish();
    }
    if (root.has("pose")) {
        Section s(root.child("pose"), "pose");
        s.read("head_window", cfg.head_window);
        s.read("vessel_half_window", cfg.vessel_half_window);
        s.read("d_allow", cfg.thresholds.d_allow);
        s.read("theta_allow_deg", cfg.thresholds.theta_allow_deg);
        s.read("steering_theta_max_deg", cfg.steering.theta_max_deg);
        s.read("steering_gain", cfg.steering.gain);
        s.finish();
    }
    if (root.has("phantom")) cfg.phantom = corpus_settings_from_json(root.child("phantom"));
    root.finish();
    // Phantom truth is labelled with the same rules the pipeline applies.
    cfg.phantom.truth.thresholds = cfg.thresholds;
    cfg.phantom.truth.head_window = cfg.head_window;
    cfg.validate();
    return cfg;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

PipelineConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

namespace {

ordered_json vec(const Vec2& v) { return ordered_json::array({v.x, v.y}); }

Vec2 vec_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(std::string(what) + " must be [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

ordered_json to_json(const phantom::PhantomSpec& spec) {
    ordered_json cps = ordered_json::array();
    for (const auto& p : spec.vessel_control_points) cps.push_back(vec(p));
    ordered_json defects = ordered_json::array();
    for (const auto& d : spec.defects) defects.push_back({{"kind", phantom::to_string(d.kind)}, {"amount", d.amount}});
    return ordered_json{
        {"rng", phantom::kRngName},
        {"seed", spec.seed},
        {"width", spec.width},
        {"height", spec.height},
        {"vessel_control_points", cps},
        {"vessel_radius", spec.vessel_radius},
        {"robot_offset", spec.robot_offset},
        {"robot_angle_deg", spec.robot_angle_deg},
        {"robot_length", spec.robot_length},
        {"robot_radius", spec.robot_radius},
        {"head_straight_length", spec.head_straight_length},
        {"entry_offset", spec.entry_offset},
        {"defects", defects},
    };
}

phantom::PhantomSpec phantom_spec_from_json(const json& doc) {
    phantom::PhantomSpec spec;
    Section s(doc, "spec");
    std::string rng = phantom::kRngName;
    s.read("rng", rng);
    require(rng == phantom::kRngName, std::string("spec.rng must be '") + phantom::kRngName + "'");
    s.read("seed", spec.seed);
    s.read("width", spec.width);
    s.read("height", spec.height);
    if (s.has("vessel_control_points")) {
        const json& cps = s.child("vessel_control_points");
        require(cps.is_array(), "spec.vessel_control_points must be an array");
        for (const auto& p : cps) spec.vessel_control_points.push_back(vec_from(p, "control point"));
    }
    s.read("vessel_radius", spec.vessel_radius);
    s.read("robot_offset", spec.robot_offset);
    s.read("robot_angle_deg", spec.robot_angle_deg);
    s.read("robot_length", spec.robot_length);
    s.read("robot_radius", spec.robot_radius);
    s.read("head_straight_length", spec.head_straight_length);
    s.read("entry_offset", spec.entry_offset);
    if (s.has("defects")) {
        const json& ds = s.child("defects");
        require(ds.is_array(), "spec.defects must be an array");
        for (const auto& d : ds) {
            Section ds_sec(d, "spec.defects[]");
            std::string kind;
            double amount = 0.0;
            ds_sec.read("kind", kind);
            ds_sec.read("amount", amount);
            ds_sec.finish();
            try {
                spec.defects.push_back({phantom::parse_defect_kind(kind), amount});
            } catch (const SpecError& e) {
                throw ConfigError(e.what());
            }
        }
    }
    s.finish();
    return spec;
}

ordered_json to_json(const phantom::PhantomTruth& t) {
    return ordered_json{
        {"head", vec(t.head)},
        {"tail", vec(t.tail)},
        {"entry", vec(t.entry)},
        {"vessel_tangent", vec(t.vessel_tangent)},
        {"robot_direction", vec(t.robot_direction)},
        {"theta_true", t.theta_true},
        {"c_head_true", t.c_head_true},
        {"c_tail_true", t.c_tail_true},
        {"d_head_true", t.d_head_true},
        {"d_tail_true", t.d_tail_true},
        {"s_true", t.s_true},
        {"state_true", std::string(to_string(t.state_true))},
    };
}

phantom::PhantomTruth phantom_truth_from_json(const json& doc) {
    phantom::PhantomTruth t;
    Section s(doc, "truth");
    auto read_vec = [&](const char* key, Vec2& out) {
        if (s.has(key)) out = vec_from(s.child(key), key);
    };
    read_vec("head", t.head);
    read_vec("tail", t.tail);
    read_vec("entry", t.entry);
    read_vec("vessel_tangent", t.vessel_tangent);
    read_vec("robot_direction", t.robot_direction);
    s.read("theta_true", t.theta_true);
    s.read("c_head_true", t.c_head_true);
    s.read("c_tail_true", t.c_tail_true);
    s.read("d_head_true", t.d_head_true);
    s.read("d_tail_true", t.d_tail_true);
    s.read("s_true", t.s_true);
    std::string state = "A";
    s.read("state_true", state);
    try {
        t.state_true = parse_label(state);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    s.finish();
    return t;
}

}  // namespace robopose
