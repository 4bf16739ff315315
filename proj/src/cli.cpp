#include "robopose/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "robopose/evalstats.hpp"
#include "robopose/pipeline.hpp"
#include "robopose/raster_io.hpp"

namespace robopose::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure by index.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ordered_json applied_json(const phantom::AppliedDefect& a) {
    return ordered_json{
        {"kind", phantom::to_string(a.defect.kind)},
        {"amount", a.defect.amount},
        {"location", {a.location.x, a.location.y}},
        {"bbox", {a.x0, a.y0, a.x1, a.y1}},
    };
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

template <class Fn>
ordered_json null_on_insufficient(Fn fn) {
    try {
        return fn();
    } catch (const InsufficientDataError&) {
        return nullptr;
    } catch (const UndefinedCorrelationError&) {
        return nullptr;
    }
}

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Debug overlay: vessel mask dim, robot mask bright, fitted lines and head marked.
GrayImage overlay(const PixelGrid& vessel, const PixelGrid& robot, const Perception* p) {
    GrayImage img{vessel.width(), vessel.height(), std::vector<std::uint8_t>(vessel.cells().size(), 0)};
    auto put = [&](int x, int y, std::uint8_t v) {
        if (vessel.in_bounds(x, y)) img.pixels[static_cast<std::size_t>(y) * img.width + x] = v;
    };
    for (int y = 0; y < vessel.height(); ++y)
        for (int x = 0; x < vessel.width(); ++x) {
            if (vessel.at(x, y)) put(x, y, 70);
            if (robot.at(x, y)) put(x, y, 150);
        }
    if (!p) return img;
    for (const Point& q : p->robot_path.points) put(q.x, q.y, 200);
    auto draw_line = [&](const FittedSegment& seg, std::uint8_t v) {
        for (double t = -60; t <= 60; t += 0.5) {
            const Vec2 q = seg.center + seg.direction * t;
            put(static_cast<int>(std::lround(q.x)), static_cast<int>(std::lround(q.y)), v);
        }
    };
    draw_line(p->vessel_segment, 110);
    draw_line(p->robot_segment, 230);
    for (int d = -3; d <= 3; ++d) {
        put(p->head.x + d, p->head.y, 255);
        put(p->head.x, p->head.y + d, 255);
    }
    return img;
}

}  // namespace

std::string record_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ph%05zu", index);
    return buf;
}

std::string report_text(const ordered_json& report) { return report.dump(2) + "\n"; }

void generate_corpus(const phantom::CorpusSettings& settings, std::size_t count, std::uint64_t seed,
                     const fs::path& out_dir, unsigned jobs) {
    fs::create_directories(out_dir / "masks");
    fs::create_directories(out_dir / "frames");
    std::vector<std::string> lines(count);
    parallel_for(count, jobs, [&](std::size_t i) {
        const std::string id = record_id(i);
        const std::uint64_t rec_seed = phantom::derive_seed(seed, i);
        const auto spec = phantom::sample_spec(settings, rec_seed, phantom::target_state(settings, i));
        const auto ph = phantom::generate(spec, settings.truth);
        const fs::path vessel_rel = fs::path("masks") / (id + "_vessel.png");
        const fs::path robot_rel = fs::path("masks") / (id + "_robot.png");
        const fs::path frame_rel = fs::path("frames") / (id + ".png");
        save_mask(out_dir / vessel_rel, ph.vessel_mask);
        save_mask(out_dir / robot_rel, ph.robot_mask);
        write_gray_image(out_dir / frame_rel,
                         phantom::render_frame(ph.vessel_mask, ph.robot_mask, phantom::derive_seed(rec_seed, 3),
                                               settings.render));
        ordered_json rec{
            {"id", id},
            {"rng", phantom::kRngName},
            {"spec", to_json(spec)},
            {"truth", to_json(ph.truth)},
            {"applied_defects", ordered_json::array()},
            {"vessel_mask_path", vessel_rel.generic_string()},
            {"robot_mask_path", robot_rel.generic_string()},
            {"frame_path", frame_rel.generic_string()},
        };
        for (const auto& a : ph.applied_defects) rec["applied_defects"].push_back(applied_json(a));
        lines[i] = rec.dump() + "\n";
    });
    std::string text;
    for (const auto& l : lines) text += l;
    write_text(out_dir / "manifest.jsonl", text);
}

std::vector<ManifestRecord> read_manifest(const fs::path& manifest) {
    std::ifstream in(manifest, std::ios::binary);
    if (!in) throw IoError("cannot read " + manifest.string());
    std::vector<ManifestRecord> out;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = manifest.string() + ":" + std::to_string(lineno);
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError(where + ": " + e.what());
        }
        try {
            ManifestRecord r;
            r.id = doc.at("id").get<std::string>();
            r.spec = doc.value("spec", json::object());
            r.truth = phantom_truth_from_json(doc.at("truth"));
            r.vessel_mask_path = doc.at("vessel_mask_path").get<std::string>();
            r.robot_mask_path = doc.at("robot_mask_path").get<std::string>();
            r.frame_path = doc.value("frame_path", std::string());
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw FormatError(where + ": " + e.what());
        } catch (const ConfigError& e) {
            throw FormatError(where + ": " + e.what());
        }
    }
    return out;
}

std::size_t perceive_batch(const fs::path& manifest, const fs::path& out_dir, const PipelineConfig& cfg,
                           unsigned jobs) {
    const auto records = read_manifest(manifest);
    const fs::path base = manifest.parent_path();
    fs::create_directories(out_dir);
    std::atomic<std::size_t> missing{0};
    parallel_for(records.size(), jobs, [&](std::size_t i) {
        const auto& r = records[i];
        const PixelGrid vessel = load_mask(resolve(base, r.vessel_mask_path), cfg.mask_threshold);
        const PixelGrid robot = load_mask(resolve(base, r.robot_mask_path), cfg.mask_threshold);
        ordered_json report;
        try {
            report = pose_report(perceive(vessel, robot, cfg));
        } catch (const NotFoundError& e) {
            report = ordered_json{{"found", false}, {"error", e.what()}};
            ++missing;
        } catch (const DegenerateInputError& e) {
            report = ordered_json{{"found", false}, {"error", e.what()}};
            ++missing;
        }
        write_text(out_dir / (r.id + ".json"), report_text(report));
    });
    return missing;
}

ordered_json evaluate_corpus(const fs::path& manifest, const fs::path& reports_dir) {
    const auto records = read_manifest(manifest);

    std::vector<json> reports(records.size());
    std::vector<std::string> absent;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const fs::path p = reports_dir / (records[i].id + ".json");
        if (!fs::exists(p)) {
            absent.push_back(records[i].id);
            continue;
        }
        reports[i] = read_json_file(p);
    }
    if (!absent.empty()) {
        std::string msg = "missing reports:";
        for (const auto& id : absent) msg += " " + id;
        throw NotFoundError(msg);
    }

    stats::PairedMeasurements angles;
    std::vector<std::string> actual, predicted;
    ordered_json not_found = ordered_json::array();
    double head_err_sum = 0.0;
    std::size_t head_within = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& t = records[i].truth;
        const json& rep = reports[i];
        actual.emplace_back(to_string(t.state_true));
        if (!rep.contains("theta_deg")) {
            predicted.emplace_back("none");
            not_found.push_back(records[i].id);
            continue;
        }
        try {
            angles.algorithmic.push_back(rep.at("theta_deg").get<double>());
            angles.reference.push_back(t.theta_true);
            predicted.push_back(rep.at("state").get<std::string>());
            const auto& h = rep.at("head");
            const double err = (Vec2(h.at(0).get<double>(), h.at(1).get<double>()) - t.head).norm();
            head_err_sum += err;
            head_within += err <= 3.0;
        } catch (const json::exception& e) {
            throw FormatError("report " + records[i].id + ": " + e.what());
        }
    }

    ordered_json out;
    out["records"] = records.size();
    out["found"] = angles.size();
    out["not_found"] = not_found;

    ordered_json angle;
    if (angles.size() == 0) {
        for (const char* k : {"error_stats", "pearson", "spearman", "bland_altman", "histogram"}) angle[k] = nullptr;
    } else {
        angle["error_stats"] = null_on_insufficient([&]() -> ordered_json {
            const auto e = stats::error_stats(angles);
            return ordered_json{{"mean", e.mean}, {"std", e.std}, {"median", e.median}};
        });
        angle["pearson"] = null_on_insufficient([&]() -> ordered_json { return stats::pearson(angles); });
        angle["spearman"] = null_on_insufficient([&]() -> ordered_json { return stats::spearman(angles); });
        angle["bland_altman"] = null_on_insufficient([&]() -> ordered_json {
            const auto ba = stats::bland_altman(angles);
            return ordered_json{{"mean_diff", ba.mean_diff}, {"std_diff", ba.std_diff}, {"upper_loa", ba.upper_loa},
                        {"lower_loa", ba.lower_loa}};
        });
        angle["histogram"] = null_on_insufficient([&]() -> ordered_json {
            ordered_json bins = ordered_json::array();
            for (const auto& b : stats::error_range_distribution(angles))
                bins.push_back({{"lower_pct", b.lower_pct}, {"upper_pct", b.upper_pct}, {"count", b.count},
                                {"fraction", b.fraction}});
            return bins;
        });
    }
    out["angle"] = angle;

    ordered_json head;
    head["mean_error_px"] = angles.size() ? ordered_json(head_err_sum / static_cast<double>(angles.size())) : ordered_json(nullptr);
    head["within_3px_fraction"] =
        records.empty() ? ordered_json(nullptr) : ordered_json(static_cast<double>(head_within) / static_cast<double>(records.size()));
    out["head"] = head;

    // Classes are the labels that actually occur, in a fixed order.
    std::vector<std::string> classes;
    for (const char* c : {"A", "B", "C", "D", "none"})
        if (std::count(actual.begin(), actual.end(), c) || std::count(predicted.begin(), predicted.end(), c))
            classes.emplace_back(c);
    if (records.empty()) {
        out["classification"] = nullptr;
    } else {
        const auto cm = stats::ConfusionMatrix::from_labels(classes, actual, predicted);
        const auto rep = stats::classification_report(cm);
        ordered_json c;
        c["classes"] = classes;
        c["confusion"] = cm.counts;
        c["accuracy"] = rep.accuracy;
        c["kappa"] = rep.kappa;
        c["fm"] = rep.fm;
        c["macro_avg"] = {{"precision", rep.macro_avg.precision}, {"recall", rep.macro_avg.recall},
                          {"f1", rep.macro_avg.f1}};
        c["weighted_avg"] = {{"precision", rep.weighted_avg.precision}, {"recall", rep.weighted_avg.recall},
                             {"f1", rep.weighted_avg.f1}};
        c["per_class"] = ordered_json::array();
        for (const auto& m : rep.per_class)
            c["per_class"].push_back(ordered_json{{"label", m.label}, {"precision", m.precision},
                                                  {"recall", m.recall}, {"f1", m.f1}, {"fm", m.fm},
                                                  {"support", m.support}, {"undefined", m.undefined}});
        out["classification"] = c;
    }
    return out;
}

namespace {

void write_evaluation_csvs(const ordered_json& result, const fs::path& manifest, const fs::path& reports_dir,
                           const fs::path& out) {
    const fs::path stem = out.parent_path() / out.stem();
    std::string ba = "mean,diff\n";
    if (!result["angle"]["bland_altman"].is_null()) {
        // Rebuild the pairs in manifest order; the JSON only carries the summary.
        stats::PairedMeasurements m;
        for (const auto& r : read_manifest(manifest)) {
            const json rep = read_json_file(reports_dir / (r.id + ".json"));
            if (!rep.contains("theta_deg")) continue;
            m.algorithmic.push_back(rep["theta_deg"].get<double>());
            m.reference.push_back(r.truth.theta_true);
        }
        for (const auto& [mean, diff] : stats::bland_altman(m).points)
            ba += csv_number(mean) + "," + csv_number(diff) + "\n";
    }
    write_text(stem.string() + "_bland_altman.csv", ba);

    std::string hist = "lower_pct,upper_pct,count,fraction\n";
    if (result["angle"]["histogram"].is_array())
        for (const auto& b : result["angle"]["histogram"])
            hist += csv_number(b["lower_pct"].get<double>()) + "," + csv_number(b["upper_pct"].get<double>()) + "," +
                    std::to_string(b["count"].get<std::size_t>()) + "," + csv_number(b["fraction"].get<double>()) +
                    "\n";
    write_text(stem.string() + "_histogram.csv", hist);
}

PipelineConfig config_or_default(const std::string& path) {
    PipelineConfig cfg = path.empty() ? PipelineConfig{} : load_config(path);
    cfg.validate();
    return cfg;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Robot pose perception from vessel and robot masks"};
    app.require_subcommand(1);

    std::string config_path, out_path, spec_path, manifest_path, reports_dir, out_dir, overlay_path;
    std::string vessel_path, robot_path;
    std::size_t count = 1;
    std::uint64_t seed = 0;
    unsigned jobs = 1;

    auto* gen = app.add_subcommand("generate", "Write a phantom corpus (masks, frames, manifest.jsonl)");
    gen->add_option("--spec", spec_path, "Corpus settings JSON (phantom section layout)")->check(CLI::ExistingFile);
    gen->add_option("--config", config_path, "Pipeline config; its phantom section is used without --spec")
        ->check(CLI::ExistingFile);
    gen->add_option("--count", count, "Number of phantoms")->capture_default_str();
    gen->add_option("--seed", seed, "Corpus seed")->capture_default_str();
    gen->add_option("--out", out_dir, "Output directory")->required();
    gen->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    auto* per = app.add_subcommand("perceive", "Estimate the pose from a mask pair, or a whole manifest");
    per->add_option("vessel", vessel_path, "Vessel mask (PNG/PGM)");
    per->add_option("robot", robot_path, "Robot mask (PNG/PGM)");
    per->add_option("--config", config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
    per->add_option("--out", out_path, "Report path (default stdout)");
    per->add_option("--overlay", overlay_path, "Write a debug render (PNG/PGM)");
    auto* man_opt = per->add_option("--manifest", manifest_path, "Batch mode: corpus manifest");
    auto* dir_opt = per->add_option("--out-dir", out_dir, "Batch mode: report directory");
    per->add_option("--jobs", jobs, "Worker threads (batch mode)")->capture_default_str()->check(CLI::PositiveNumber);
    man_opt->needs(dir_opt);
    dir_opt->needs(man_opt);

    auto* ev = app.add_subcommand("evaluate", "Aggregate statistics of reports against manifest truth");
    ev->add_option("--manifest", manifest_path, "Corpus manifest")->required();
    ev->add_option("--reports", reports_dir, "Directory of <id>.json reports")->required();
    ev->add_option("--out", out_path, "Aggregate JSON path (CSVs are written next to it)")->required();

    auto* cfg_cmd = app.add_subcommand("config", "Configuration helpers");
    cfg_cmd->require_subcommand(1);
    auto* init = cfg_cmd->add_subcommand("init", "Emit the default configuration");
    init->add_option("--out", out_path, "Destination (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kFailure;
    }

    try {
        if (*gen) {
            phantom::CorpusSettings settings = config_or_default(config_path).phantom;
            if (!spec_path.empty()) {
                const auto truth = settings.truth;
                settings = corpus_settings_from_json(read_json_file(spec_path));
                settings.truth = truth;
            }
            generate_corpus(settings, count, seed, out_dir, jobs);
            return kOk;
        }
        if (*per) {
            const PipelineConfig cfg = config_or_default(config_path);
            if (!manifest_path.empty()) {
                const std::size_t missing = perceive_batch(manifest_path, out_dir, cfg, jobs);
                if (missing) std::cerr << missing << " record(s) without a robot trajectory\n";
                return kOk;
            }
            if (vessel_path.empty() || robot_path.empty()) {
                std::cerr << "perceive: need VESSEL and ROBOT masks, or --manifest with --out-dir\n";
                return kFailure;
            }
            const PixelGrid vessel = load_mask(vessel_path, cfg.mask_threshold);
            const PixelGrid robot = load_mask(robot_path, cfg.mask_threshold);
            std::optional<Perception> p;
            int rc = kOk;
            try {
                p = perceive(vessel, robot, cfg);
            } catch (const NotFoundError& e) {
                std::cerr << "not found: " << e.what() << "\n";
                rc = kNotFound;
            } catch (const DegenerateInputError& e) {
                std::cerr << "not found: " << e.what() << "\n";
                rc = kNotFound;
            }
            if (!overlay_path.empty() && vessel.width() == robot.width() && vessel.height() == robot.height())
                write_gray_image(overlay_path, overlay(vessel, robot, p ? &*p : nullptr));
            if (!p) return rc;
            const std::string text = report_text(pose_report(*p));
            if (out_path.empty())
                std::cout << text;
            else
                write_text(out_path, text);
            return kOk;
        }
        if (*ev) {
            const auto result = evaluate_corpus(manifest_path, reports_dir);
            write_text(out_path, result.dump(2) + "\n");
            write_evaluation_csvs(result, manifest_path, reports_dir, out_path);
            return kOk;
        }
        if (*init) {
            const std::string text = to_json(PipelineConfig{}).dump(2) + "\n";
            if (out_path.empty())
                std::cout << text;
            else
                write_text(out_path, text);
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}

}  // namespace robopose::cli
