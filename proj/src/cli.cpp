#include "xeval/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xeval/annotation.hpp"
#include "xeval/egl.hpp"
#include "xeval/error.hpp"
#include "xeval/exposure.hpp"
#include "xeval/io_util.hpp"
#include "xeval/parallel.hpp"
#include "xeval/png_io.hpp"
#include "xeval/serialize.hpp"
#include "xeval/stats.hpp"

namespace fs = std::filesystem;

namespace xeval {

namespace {

enum class LogLevel { kQuiet = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("EXPOSURE_EVAL_LOG");
        if (!env) return LogLevel::kWarn;
        const std::string v(env);
        if (v == "quiet") return LogLevel::kQuiet;
        if (v == "info") return LogLevel::kInfo;
        if (v == "debug") return LogLevel::kDebug;
        return LogLevel::kWarn;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() >= LogLevel::kInfo) std::fprintf(stderr, "[info] %s\n", message.c_str());
}

void log_debug(const std::string& message) {
    if (log_level() >= LogLevel::kDebug) std::fprintf(stderr, "[debug] %s\n", message.c_str());
}

std::vector<std::string> load_class_names(const RunConfig& config) {
    if (config.classes_path.empty()) return default_class_names();
    std::vector<std::string> names;
    std::istringstream in(read_file_text(config.classes_path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    if (names.empty() || names.size() > 255) {
        throw format_error(config.classes_path + ": class list must have 1..255 entries");
    }
    return names;
}

void require_exists(const std::string& path, const char* what) {
    if (path.empty()) throw io_error(std::string(what) + " not set");
    if (!fs::exists(path)) throw io_error(std::string(what) + " not found: " + path);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string stem_of(const std::string& path) {
    return fs::path(path).stem().string();
}

void print_summary(const nlohmann::ordered_json& extra) {
    nlohmann::ordered_json j = extra;
    j["schema_version"] = kSchemaVersion;
    std::printf("%s\n", j.dump().c_str());
}

std::vector<std::string> bin_labels(const ExposureBins& bins) {
    std::vector<std::string> labels;
    labels.reserve(bins.bin_count);
    for (int g = 0; g < bins.bin_count; ++g) {
        const bool last = g + 1 == bins.bin_count;
        labels.push_back("[" + format_double(bins.edges[g]) + "," +
                         format_double(bins.edges[g + 1]) + (last ? "]" : ")"));
    }
    return labels;
}

int run_exposure(const RunConfig& config) {
    std::vector<std::string> image_paths;
    if (!config.manifest_path.empty()) {
        require_exists(config.manifest_path, "manifest");
        const DatasetIndex index = parse_manifest(read_file_text(config.manifest_path));
        for (const DatasetEntry& e : index.entries) image_paths.push_back(e.image_path);
    } else {
        require_exists(config.image_dir, "--images");
        for (const std::string& stem : list_png_stems(config.image_dir)) {
            image_paths.push_back(join_path(config.image_dir, stem + ".png"));
        }
    }
    if (image_paths.empty()) throw io_error("exposure: no input images");

    const ExposureBins bins = ExposureBins::uniform(config.bin_count);
    std::vector<std::vector<std::uint64_t>> per_image(image_paths.size());
    std::vector<std::pair<int, int>> dims(image_paths.size());
    parallel_for(image_paths.size(), config.jobs, [&](std::size_t i) {
        const RgbImage image = load_rgb_png(image_paths[i]);
        dims[i] = {image.width, image.height};
        per_image[i] = bin_counts(exposure_map(image), bins);
        log_debug("binned " + image_paths[i]);
    });
    for (std::size_t i = 1; i < dims.size(); ++i) {
        if (dims[i] != dims[0]) {
            throw format_error("exposure: mixed image dimensions (" + image_paths[i] + ")");
        }
    }

    std::vector<std::uint64_t> totals(bins.bin_count, 0);
    for (const auto& counts : per_image) {
        for (int g = 0; g < bins.bin_count; ++g) totals[g] += counts[g];
    }
    const std::vector<double> averages = average_bin_counts(totals, per_image.size());

    const std::string csv_path = join_path(config.out_dir, "exposure_histogram.csv");
    write_file_atomic(csv_path, histogram_csv(bins, averages));
    nlohmann::ordered_json summary;
    summary["command"] = "exposure";
    summary["images"] = image_paths.size();
    summary["bins"] = bins.bin_count;
    nlohmann::ordered_json outputs = {csv_path};
    if (config.plot) {
        const std::string svg_path = join_path(config.out_dir, "exposure_histogram.svg");
        write_file_atomic(svg_path, svg_bar_chart(bin_labels(bins), averages,
                                                  "average pixels per exposure bin", false));
        outputs.push_back(svg_path);
    }
    summary["outputs"] = outputs;
    print_summary(summary);
    return kExitOk;
}

struct EvalPair {
    std::string image_path;
    std::string gt_path;
    std::string pred_path;
};

std::vector<EvalPair> collect_eval_pairs(const RunConfig& config) {
    std::vector<EvalPair> pairs;
    require_exists(config.pred_dir, "--pred");
    if (!config.manifest_path.empty()) {
        require_exists(config.manifest_path, "manifest");
        const DatasetIndex index = parse_manifest(read_file_text(config.manifest_path));
        for (const DatasetEntry& e : index.entries) {
            pairs.push_back({e.image_path, e.label_path,
                             join_path(config.pred_dir, stem_of(e.label_path) + ".png")});
        }
    } else {
        require_exists(config.gt_dir, "--gt");
        require_exists(config.image_dir, "--images");
        for (const std::string& stem : list_png_stems(config.gt_dir)) {
            pairs.push_back({join_path(config.image_dir, stem + ".png"),
                             join_path(config.gt_dir, stem + ".png"),
                             join_path(config.pred_dir, stem + ".png")});
        }
    }
    if (pairs.empty()) throw io_error("eval: no ground-truth/prediction pairs");
    return pairs;
}

int run_eval(const RunConfig& config) {
    const std::vector<std::string> class_names = load_class_names(config);
    const int class_count = static_cast<int>(class_names.size());
    const ExposureBins bins = ExposureBins::uniform(config.bin_count);
    const std::vector<EvalPair> pairs = collect_eval_pairs(config);

    std::vector<GroupedConfusion> partials(pairs.size());
    parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
        const EvalPair& pair = pairs[i];
        const RgbImage image = load_rgb_png(pair.image_path);
        const LabelMap gt = load_label_png(pair.gt_path, class_count);
        LabelMap pred = load_label_png(pair.pred_path, class_count);
        if (image.width != gt.width || image.height != gt.height) {
            throw format_error("eval: image and ground truth differ in size: " +
                               pair.image_path);
        }
        if (pred.width != gt.width || pred.height != gt.height) {
            pred = resize_labels(pred, gt.width, gt.height);
        }
        GroupedConfusion acc(bins, class_count);
        acc.accumulate(gt, pred, exposure_map(image));
        partials[i] = std::move(acc);
        log_debug("evaluated " + pair.gt_path);
    });

    GroupedConfusion acc(bins, class_count);
    for (const GroupedConfusion& partial : partials) acc.merge(partial);

    const EvalReport report = evaluate(acc, config.beta, config.averaging);
    const std::string json_path = join_path(config.out_dir, "eval_report.json");
    const std::string csv_path = join_path(config.out_dir, "ef1_per_group.csv");
    write_file_atomic(json_path, eval_report_json(report, class_names));
    write_file_atomic(csv_path, ef1_csv(report));

    nlohmann::ordered_json summary;
    summary["command"] = "eval";
    summary["images"] = pairs.size();
    summary["miou"] = report.miou;
    summary["mef1"] = report.mef1;
    nlohmann::ordered_json outputs = {json_path, csv_path};
    if (config.plot) {
        std::vector<double> values;
        for (const auto& v : report.ef1_per_group) values.push_back(v.value_or(0.0));
        const std::string svg_path = join_path(config.out_dir, "ef1_per_group.svg");
        write_file_atomic(svg_path,
                          svg_bar_chart(bin_labels(bins), values, "EF1 per exposure bin", false));
        outputs.push_back(svg_path);
    }
    summary["outputs"] = outputs;
    print_summary(summary);
    return kExitOk;
}

OverrideMap load_overrides(const std::string& path) {
    OverrideMap overrides;
    const nlohmann::json j = nlohmann::json::parse(read_file_text(path), nullptr, true);
    if (!j.is_object()) throw format_error(path + ": overrides must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        std::size_t pixel = 0;
        try {
            pixel = std::stoull(key);
        } catch (...) {
            throw format_error(path + ": override key '" + key + "' is not a pixel index");
        }
        if (!value.is_number_unsigned() || value.get<std::uint64_t>() > 255) {
            throw format_error(path + ": override label for pixel " + key +
                               " must be an id in [0,255]");
        }
        overrides[pixel] = static_cast<std::uint8_t>(value.get<std::uint64_t>());
    }
    return overrides;
}

int run_merge(const RunConfig& config) {
    require_exists(config.a_dir, "--a");
    require_exists(config.b_dir, "--b");
    const std::vector<std::string> class_names = load_class_names(config);
    const int class_count = static_cast<int>(class_names.size());

    const std::vector<std::string> stems_a = list_png_stems(config.a_dir);
    const std::vector<std::string> stems_b = list_png_stems(config.b_dir);
    std::vector<std::string> stems;
    std::set_intersection(stems_a.begin(), stems_a.end(), stems_b.begin(), stems_b.end(),
                          std::back_inserter(stems));
    if (stems.empty()) throw io_error("merge: no matching label pairs in --a and --b");

    struct PerImage {
        std::string decisions;
        DisagreementCounts counts;
    };
    std::vector<PerImage> results(stems.size());
    const std::string merged_dir = join_path(config.out_dir, "merged");
    fs::create_directories(merged_dir);

    parallel_for(stems.size(), config.jobs, [&](std::size_t i) {
        const std::string& stem = stems[i];
        const LabelMap a = load_label_png(join_path(config.a_dir, stem + ".png"), class_count);
        const LabelMap b = load_label_png(join_path(config.b_dir, stem + ".png"), class_count);
        OverrideMap overrides;
        if (!config.overrides_dir.empty()) {
            const std::string path = join_path(config.overrides_dir, stem + ".json");
            if (fs::exists(path)) overrides = load_overrides(path);
        }
        MergeResult merged = merge_annotations(a, b, overrides);
        save_label_png(join_path(merged_dir, stem + ".png"), merged.merged);
        results[i].decisions = decisions_jsonl(stem, merged.decisions);
        results[i].counts.accumulate(a, b, merged.merged);
        log_debug("merged " + stem);
    });

    std::string decisions;
    DisagreementCounts counts;
    for (const PerImage& r : results) {
        decisions += r.decisions;
        counts.merge(r.counts);
    }
    const std::string decisions_path = join_path(config.out_dir, "decisions.jsonl");
    const std::string stats_path = join_path(config.out_dir, "disagreement_stats.json");
    write_file_atomic(decisions_path, decisions);
    write_file_atomic(stats_path, disagreement_stats_json(counts.finalize(), class_names));

    nlohmann::ordered_json summary;
    summary["command"] = "merge";
    summary["images"] = stems.size();
    summary["outputs"] = {merged_dir, decisions_path, stats_path};
    print_summary(summary);
    return kExitOk;
}

std::vector<EntryHistogram> load_histograms(const DatasetIndex& index, int jobs) {
    std::vector<EntryHistogram> histograms(index.entries.size());
    parallel_for(index.entries.size(), jobs, [&](std::size_t i) {
        const DatasetEntry& entry = index.entries[i];
        histograms[i] = entry_histogram(entry, load_label_png(entry.label_path,
                                                              index.class_count));
    });
    return histograms;
}

int run_stats(const RunConfig& config) {
    require_exists(config.manifest_path, "manifest");
    const std::vector<std::string> class_names = load_class_names(config);
    DatasetIndex index = parse_manifest(read_file_text(config.manifest_path),
                                        static_cast<int>(class_names.size()));
    if (index.entries.empty()) throw io_error("stats: manifest is empty");
    const std::vector<EntryHistogram> histograms = load_histograms(index, config.jobs);

    const ClassDistribution dist = class_distribution(histograms);
    const double invalid = invalid_ratio(histograms);
    const auto cities = per_city_counts(histograms);

    const std::string json_path = join_path(config.out_dir, "dataset_stats.json");
    write_file_atomic(json_path, dataset_stats_json(dist, invalid, cities, class_names));

    nlohmann::ordered_json summary;
    summary["command"] = "stats";
    summary["entries"] = histograms.size();
    summary["invalid_ratio"] = invalid;
    nlohmann::ordered_json outputs = {json_path};
    if (config.plot) {
        std::vector<std::string> labels;
        std::vector<double> values;
        for (const auto& [id, count] : dist.per_class_pixels) {
            labels.push_back(id >= 0 && static_cast<std::size_t>(id) < class_names.size()
                                 ? class_names[id]
                                 : std::to_string(id));
            values.push_back(static_cast<double>(count));
        }
        const std::string svg_path = join_path(config.out_dir, "class_distribution.svg");
        write_file_atomic(svg_path,
                          svg_bar_chart(labels, values, "labeled pixels per class", true));
        outputs.push_back(svg_path);
    }
    summary["outputs"] = outputs;
    print_summary(summary);
    return kExitOk;
}

int run_split(const RunConfig& config) {
    require_exists(config.manifest_path, "manifest");
    const std::vector<std::string> class_names = load_class_names(config);
    DatasetIndex index = parse_manifest(read_file_text(config.manifest_path),
                                        static_cast<int>(class_names.size()));
    const std::vector<EntryHistogram> histograms = load_histograms(index, config.jobs);
    const SplitResult split = stratified_split(histograms, config.train_fraction, config.seed);

    DatasetIndex train{{}, index.class_count}, test{{}, index.class_count};
    std::vector<EntryHistogram> train_h, test_h;
    for (std::size_t i : split.train_indices) {
        train.entries.push_back(index.entries[i]);
        train_h.push_back(histograms[i]);
    }
    for (std::size_t i : split.test_indices) {
        test.entries.push_back(index.entries[i]);
        test_h.push_back(histograms[i]);
    }

    const std::string train_path = join_path(config.out_dir, "train.tsv");
    const std::string test_path = join_path(config.out_dir, "test.tsv");
    const std::string summary_path = join_path(config.out_dir, "split_summary.json");
    write_file_atomic(train_path, write_manifest(train));
    write_file_atomic(test_path, write_manifest(test));
    write_file_atomic(summary_path,
                      split_summary_json(split, per_city_counts(train_h),
                                         per_city_counts(test_h), config.train_fraction,
                                         config.seed));

    nlohmann::ordered_json summary;
    summary["command"] = "split";
    summary["train_size"] = split.train_indices.size();
    summary["test_size"] = split.test_indices.size();
    summary["divergence"] = split.divergence;
    summary["outputs"] = {train_path, test_path, summary_path};
    print_summary(summary);
    return kExitOk;
}

int run_egl_check(const RunConfig& config) {
    GradCheckConfig grad_config;
    grad_config.seed = config.seed;
    grad_config.instances = config.egl_instances;
    grad_config.max_batch = config.egl_max_batch;
    grad_config.max_channels = config.egl_max_channels;
    grad_config.max_spatial = config.egl_max_spatial;
    grad_config.step = config.egl_step;
    grad_config.tolerance = config.egl_tolerance;

    const GradCheckResult result = check_egl_gradients(grad_config);
    for (const auto& group : result.groups) {
        std::printf("gradient %-12s max_rel_error=%.3e %s\n", group.name.c_str(),
                    group.max_rel_error,
                    group.max_rel_error < result.tolerance ? "ok" : "FAIL");
    }

    nlohmann::ordered_json summary;
    summary["command"] = "egl-check";
    summary["instances"] = result.instances;
    summary["tolerance"] = result.tolerance;
    summary["passed"] = result.passed;
    if (!config.out_dir.empty()) {
        nlohmann::ordered_json j = summary;
        j["schema_version"] = kSchemaVersion;
        nlohmann::ordered_json groups = nlohmann::ordered_json::object();
        for (const auto& group : result.groups) groups[group.name] = group.max_rel_error;
        j["max_rel_error"] = groups;
        const std::string json_path = join_path(config.out_dir, "egl_check.json");
        write_file_atomic(json_path, j.dump(2) + "\n");
        summary["outputs"] = {json_path};
    }
    print_summary(summary);
    return result.passed ? kExitOk : kExitGradCheckFailed;
}

}  // namespace

int run(const RunConfig& config) {
    try {
        if (config.command != Command::kEglCheck) {
            if (config.out_dir.empty()) throw io_error("--out directory not set");
            fs::create_directories(config.out_dir);
        }
        log_info("running command");
        switch (config.command) {
            case Command::kExposure: return run_exposure(config);
            case Command::kEval: return run_eval(config);
            case Command::kMerge: return run_merge(config);
            case Command::kStats: return run_stats(config);
            case Command::kSplit: return run_split(config);
            case Command::kEglCheck: return run_egl_check(config);
        }
        return kExitUsage;
    } catch (const io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitMissingInput;
    } catch (const metric_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitMetricUndefined;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadData;
    }
}

}  // namespace xeval
