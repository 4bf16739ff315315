#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "robopose/config.hpp"

namespace robopose::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kNotFound = 2 };

/// Entry point behind the `robopose` executable.
int run(int argc, const char* const* argv);

struct ManifestRecord {
    std::string id;
    nlohmann::json spec;
    phantom::PhantomTruth truth;
    std::filesystem::path vessel_mask_path;  // as written, relative to the manifest
    std::filesystem::path robot_mask_path;
    std::filesystem::path frame_path;
};

std::string record_id(std::size_t index);

/// Writes masks, frames and manifest.jsonl under out_dir. Records are ordered by id.
void generate_corpus(const phantom::CorpusSettings& settings, std::size_t count, std::uint64_t seed,
                     const std::filesystem::path& out_dir, unsigned jobs);

/// Throws FormatError on malformed lines.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& manifest);

/// Serialised pose report, exactly as written to disk (two-space indent, trailing newline).
std::string report_text(const nlohmann::ordered_json& report);

/// One <id>.json per record; records without a trajectory get {"found": false, ...}.
/// Returns the number of records without a trajectory.
std::size_t perceive_batch(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                           const PipelineConfig& cfg, unsigned jobs);

/// Aggregate evaluation; throws NotFoundError naming the ids without a report file.
nlohmann::ordered_json evaluate_corpus(const std::filesystem::path& manifest, const std::filesystem::path& reports_dir);

}  // namespace robopose::cli
