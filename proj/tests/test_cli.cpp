#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "xeval/cli.hpp"
#include "xeval/io_util.hpp"
#include "xeval/png_io.hpp"

using namespace xeval;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("xeval_cli_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const {
        return sub.empty() ? path.string() : (path / sub).string();
    }
};

RgbImage solid_image(int w, int h, std::uint8_t value) {
    RgbImage image;
    image.width = w;
    image.height = h;
    image.pixels.assign(static_cast<std::size_t>(w) * h * 3, value);
    return image;
}

LabelMap map_of(std::vector<std::uint8_t> labels, int w, int h, int classes = 19) {
    LabelMap map;
    map.width = w;
    map.height = h;
    map.class_count = classes;
    map.labels = std::move(labels);
    return map;
}

nlohmann::json read_json(const std::string& path) {
    return nlohmann::json::parse(read_file_text(path));
}

}  // namespace

TEST_CASE("eval on identical directories scores perfectly") {
    TempDir dir("eval_perfect");
    fs::create_directories(dir.str("images"));
    fs::create_directories(dir.str("gt"));
    fs::create_directories(dir.str("pred"));
    for (int i = 0; i < 3; ++i) {
        const std::string stem = "img" + std::to_string(i);
        save_rgb_png(dir.str("images/" + stem + ".png"), solid_image(4, 2, 100));
        const LabelMap gt = map_of({0, 1, 2, 0, 1, 2, 3, 3}, 4, 2);
        save_label_png(dir.str("gt/" + stem + ".png"), gt);
        save_label_png(dir.str("pred/" + stem + ".png"), gt);
    }

    RunConfig config;
    config.command = Command::kEval;
    config.image_dir = dir.str("images");
    config.gt_dir = dir.str("gt");
    config.pred_dir = dir.str("pred");
    config.out_dir = dir.str("out");
    CHECK(run(config) == kExitOk);

    const auto report = read_json(dir.str("out/eval_report.json"));
    CHECK(report["miou"].get<double>() == 1.0);
    CHECK(report["mef1"].get<double>() == 1.0);
    CHECK(report["schema_version"].get<int>() == 1);
    CHECK(report["averaging"].get<std::string>() == "macro");
}

TEST_CASE("exposure command reproduces the black/white histogram") {
    TempDir dir("exposure_bw");
    fs::create_directories(dir.str("images"));
    save_rgb_png(dir.str("images/black.png"), solid_image(2, 2, 0));
    save_rgb_png(dir.str("images/white.png"), solid_image(2, 2, 255));

    RunConfig config;
    config.command = Command::kExposure;
    config.image_dir = dir.str("images");
    config.out_dir = dir.str("out");
    config.plot = true;
    CHECK(run(config) == kExitOk);

    const std::string csv = read_file_text(dir.str("out/exposure_histogram.csv"));
    CHECK(csv ==
          "bin_low,bin_high,avg_pixels\n"
          "0,0.1,2\n"
          "0.1,0.2,0\n"
          "0.2,0.3,0\n"
          "0.3,0.4,0\n"
          "0.4,0.5,0\n"
          "0.5,0.6,0\n"
          "0.6,0.7,0\n"
          "0.7,0.8,0\n"
          "0.8,0.9,0\n"
          "0.9,1,2\n");
    CHECK(fs::exists(dir.str("out/exposure_histogram.svg")));
}

TEST_CASE("eval reports the four-pixel fixture's miou") {
    TempDir dir("eval_fixture");
    fs::create_directories(dir.str("images"));
    fs::create_directories(dir.str("gt"));
    fs::create_directories(dir.str("pred"));
    save_rgb_png(dir.str("images/x.png"), solid_image(2, 2, 128));
    save_label_png(dir.str("gt/x.png"), map_of({0, 0, 1, 1}, 2, 2));
    save_label_png(dir.str("pred/x.png"), map_of({0, 1, 1, 1}, 2, 2));

    RunConfig config;
    config.command = Command::kEval;
    config.image_dir = dir.str("images");
    config.gt_dir = dir.str("gt");
    config.pred_dir = dir.str("pred");
    config.out_dir = dir.str("out");
    CHECK(run(config) == kExitOk);

    const auto report = read_json(dir.str("out/eval_report.json"));
    CHECK(report["miou"].get<double>() == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("exit codes distinguish failure classes") {
    TempDir dir("exit_codes");

    SUBCASE("missing inputs exit 2 and write nothing") {
        RunConfig config;
        config.command = Command::kEval;
        config.image_dir = dir.str("nope");
        config.gt_dir = dir.str("nope");
        config.pred_dir = dir.str("nope");
        config.out_dir = dir.str("out");
        CHECK(run(config) == kExitMissingInput);
        CHECK(!fs::exists(dir.str("out/eval_report.json")));
    }

    SUBCASE("malformed labels exit 3") {
        fs::create_directories(dir.str("images"));
        fs::create_directories(dir.str("gt"));
        fs::create_directories(dir.str("pred"));
        save_rgb_png(dir.str("images/x.png"), solid_image(2, 2, 10));
        save_label_png(dir.str("gt/x.png"), map_of({0, 0, 1, 1}, 2, 2));
        save_rgb_png(dir.str("pred/x.png"), solid_image(2, 2, 10));  // RGB, not a label
        RunConfig config;
        config.command = Command::kEval;
        config.image_dir = dir.str("images");
        config.gt_dir = dir.str("gt");
        config.pred_dir = dir.str("pred");
        config.out_dir = dir.str("out");
        CHECK(run(config) == kExitBadData);
        CHECK(!fs::exists(dir.str("out/eval_report.json")));
    }

    SUBCASE("undefined metrics exit 4") {
        fs::create_directories(dir.str("images"));
        fs::create_directories(dir.str("gt"));
        fs::create_directories(dir.str("pred"));
        save_rgb_png(dir.str("images/x.png"), solid_image(1, 1, 10));
        save_label_png(dir.str("gt/x.png"), map_of({kInvalidLabel}, 1, 1));
        save_label_png(dir.str("pred/x.png"), map_of({0}, 1, 1));
        RunConfig config;
        config.command = Command::kEval;
        config.image_dir = dir.str("images");
        config.gt_dir = dir.str("gt");
        config.pred_dir = dir.str("pred");
        config.out_dir = dir.str("out");
        CHECK(run(config) == kExitMetricUndefined);
    }

    SUBCASE("gradient-check failure exits 5") {
        RunConfig config;
        config.command = Command::kEglCheck;
        config.egl_instances = 3;
        config.egl_tolerance = 1e-18;  // unreachable on purpose
        CHECK(run(config) == kExitGradCheckFailed);
        config.egl_tolerance = 1e-4;
        CHECK(run(config) == kExitOk);
    }
}

TEST_CASE("merge command writes consensus artifacts") {
    TempDir dir("merge_cmd");
    fs::create_directories(dir.str("a"));
    fs::create_directories(dir.str("b"));
    fs::create_directories(dir.str("overrides"));
    save_label_png(dir.str("a/x.png"), map_of({0, 0, 1, 2}, 2, 2));
    save_label_png(dir.str("b/x.png"), map_of({0, 1, 1, 2}, 2, 2));
    write_file_atomic(dir.str("overrides/x.json"), std::string("{\"1\": 1}\n"));

    RunConfig config;
    config.command = Command::kMerge;
    config.a_dir = dir.str("a");
    config.b_dir = dir.str("b");
    config.overrides_dir = dir.str("overrides");
    config.out_dir = dir.str("out");
    CHECK(run(config) == kExitOk);

    const LabelMap merged = load_label_png(dir.str("out/merged/x.png"));
    CHECK(merged.labels == std::vector<std::uint8_t>{0, 1, 1, 2});

    const std::string decisions = read_file_text(dir.str("out/decisions.jsonl"));
    const auto line = nlohmann::json::parse(decisions.substr(0, decisions.find('\n')));
    CHECK(line["pixel"].get<int>() == 1);
    CHECK(line["resolution"].get<std::string>() == "majority-selected");

    const auto stats = read_json(dir.str("out/disagreement_stats.json"));
    CHECK(stats["differing_pixels"].get<int>() == 1);
}

TEST_CASE("stats and split commands run end to end deterministically") {
    TempDir dir("stats_split");
    fs::create_directories(dir.str("labels"));
    fs::create_directories(dir.str("images"));
    std::string manifest;
    for (int i = 0; i < 6; ++i) {
        const std::string stem = "e" + std::to_string(i);
        std::vector<std::uint8_t> labels(16);
        for (int p = 0; p < 16; ++p) {
            labels[p] = static_cast<std::uint8_t>((i + p) % 3);
        }
        if (i == 0) labels[0] = kInvalidLabel;
        save_label_png(dir.str("labels/" + stem + ".png"), map_of(labels, 4, 4));
        save_rgb_png(dir.str("images/" + stem + ".png"), solid_image(4, 4, 30));
        manifest += dir.str("images/" + stem + ".png") + "\t" +
                    dir.str("labels/" + stem + ".png") + "\t" +
                    (i % 2 ? "Tokyo" : "London") + "\n";
    }
    write_file_atomic(dir.str("manifest.tsv"), manifest);

    RunConfig stats;
    stats.command = Command::kStats;
    stats.manifest_path = dir.str("manifest.tsv");
    stats.out_dir = dir.str("stats_out");
    stats.plot = true;
    CHECK(run(stats) == kExitOk);
    const auto stats_json = read_json(dir.str("stats_out/dataset_stats.json"));
    CHECK(stats_json["invalid_ratio"].get<double>() ==
          doctest::Approx(1.0 / 96.0).epsilon(1e-12));
    CHECK(stats_json["per_city_images"]["Tokyo"].get<int>() == 3);
    CHECK(fs::exists(dir.str("stats_out/class_distribution.svg")));

    RunConfig split;
    split.command = Command::kSplit;
    split.manifest_path = dir.str("manifest.tsv");
    split.train_fraction = 0.5;
    split.seed = 42;
    split.out_dir = dir.str("split_a");
    CHECK(run(split) == kExitOk);
    split.out_dir = dir.str("split_b");
    CHECK(run(split) == kExitOk);

    CHECK(read_file_text(dir.str("split_a/train.tsv")) ==
          read_file_text(dir.str("split_b/train.tsv")));
    CHECK(read_file_text(dir.str("split_a/test.tsv")) ==
          read_file_text(dir.str("split_b/test.tsv")));
    const auto summary = read_json(dir.str("split_a/split_summary.json"));
    CHECK(summary["train_size"].get<int>() == 3);
    CHECK(summary["test_size"].get<int>() == 3);
}

TEST_CASE("predictions at another resolution are rescaled before scoring") {
    TempDir dir("eval_rescale");
    fs::create_directories(dir.str("images"));
    fs::create_directories(dir.str("gt"));
    fs::create_directories(dir.str("pred"));
    save_rgb_png(dir.str("images/x.png"), solid_image(4, 4, 128));
    std::vector<std::uint8_t> gt(16, 0);
    for (int p = 8; p < 16; ++p) gt[p] = 1;
    save_label_png(dir.str("gt/x.png"), map_of(gt, 4, 4));
    save_label_png(dir.str("pred/x.png"), map_of({0, 0, 1, 1}, 2, 2));  // half size

    RunConfig config;
    config.command = Command::kEval;
    config.image_dir = dir.str("images");
    config.gt_dir = dir.str("gt");
    config.pred_dir = dir.str("pred");
    config.out_dir = dir.str("out");
    CHECK(run(config) == kExitOk);
    const auto report = read_json(dir.str("out/eval_report.json"));
    CHECK(report["miou"].get<double>() == 1.0);  // upscale reproduces the gt exactly
}
