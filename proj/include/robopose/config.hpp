#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "robopose/phantom.hpp"
#include "robopose/pose.hpp"

namespace robopose {

/// Every tunable of the pipeline and the phantom generator, one section per module.
struct PipelineConfig {
    int mask_threshold = 128;
    CleanConfig clean;
    GapRepairConfig gap;
    /// Branches this short that end in a junction are thinning artefacts.
    int robot_spur_length = 4;
    int vessel_spur_length = 40;
    TraceConfig trace;
    int head_window = 40;
    int vessel_half_window = 20;
    PoseThresholds thresholds;
    SteeringConfig steering;
    phantom::CorpusSettings phantom;

    /// Throws ConfigError when a field is outside its domain.
    void validate() const;
};

/// Serialised with sections grid, skeleton, trajectory, pose, phantom.
nlohmann::ordered_json to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

/// The phantom section alone, as used by `generate --spec`.
nlohmann::ordered_json to_json(const phantom::CorpusSettings& s);
phantom::CorpusSettings corpus_settings_from_json(const nlohmann::json& doc);

nlohmann::ordered_json to_json(const phantom::PhantomSpec& spec);
phantom::PhantomSpec phantom_spec_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const phantom::PhantomTruth& truth);
phantom::PhantomTruth phantom_truth_from_json(const nlohmann::json& doc);

/// Parses a JSON file, mapping failures to IoError / ConfigError.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace robopose
