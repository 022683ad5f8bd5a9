#include <CLI11.hpp>

#include "xeval/cli.hpp"

namespace {

void add_common(CLI::App* cmd, xeval::RunConfig& config) {
    cmd->add_option("--classes", config.classes_path,
                    "class list file, one name per line (id = line number)");
    cmd->add_option("--jobs", config.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", config.out_dir, "output directory");
}

std::string averaging_str = "macro";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exposure-binned segmentation evaluation and dataset tooling"};
    app.require_subcommand(1);

    xeval::RunConfig config;

    CLI::App* exposure = app.add_subcommand(
        "exposure", "per-bin exposure histogram of an image set");
    exposure->add_option("--manifest", config.manifest_path, "dataset manifest (TSV)");
    exposure->add_option("--images", config.image_dir, "directory of RGB PNG images");
    exposure->add_option("--bins", config.bin_count, "number of exposure bins")
        ->check(CLI::PositiveNumber);
    exposure->add_flag("--plot", config.plot, "also emit an SVG chart");
    add_common(exposure, config);

    CLI::App* eval = app.add_subcommand(
        "eval", "mIoU and exposure-binned EF1 of predictions against ground truth");
    eval->add_option("--manifest", config.manifest_path, "dataset manifest (TSV)");
    eval->add_option("--images", config.image_dir, "directory of RGB PNG images");
    eval->add_option("--gt", config.gt_dir, "directory of ground-truth label PNGs");
    eval->add_option("--pred", config.pred_dir, "directory of predicted label PNGs")
        ->required();
    eval->add_option("--bins", config.bin_count, "number of exposure bins")
        ->check(CLI::PositiveNumber);
    eval->add_option("--averaging", averaging_str, "macro or micro")
        ->check(CLI::IsMember({"macro", "micro"}));
    eval->add_option("--beta", config.beta, "F-measure beta")->check(CLI::PositiveNumber);
    eval->add_flag("--plot", config.plot, "also emit an SVG chart");
    add_common(eval, config);

    CLI::App* merge = app.add_subcommand(
        "merge", "three-annotator consensus merge of two label sets");
    merge->add_option("--a", config.a_dir, "annotator A label PNGs")->required();
    merge->add_option("--b", config.b_dir, "annotator B label PNGs")->required();
    merge->add_option("--overrides", config.overrides_dir,
                      "reviewer overrides, <stem>.json per image");
    add_common(merge, config);

    CLI::App* stats = app.add_subcommand("stats", "dataset class and invalid statistics");
    stats->add_option("--manifest", config.manifest_path, "dataset manifest (TSV)")
        ->required();
    stats->add_flag("--plot", config.plot, "also emit an SVG chart");
    add_common(stats, config);

    CLI::App* split = app.add_subcommand(
        "split", "deterministic stratified train/test split");
    split->add_option("--manifest", config.manifest_path, "dataset manifest (TSV)")
        ->required();
    split->add_option("--train-fraction", config.train_fraction, "train share in (0,1)");
    split->add_option("--seed", config.seed, "split seed");
    add_common(split, config);

    CLI::App* egl = app.add_subcommand(
        "egl-check", "finite-difference verification of the guidance-layer gradients");
    egl->add_option("--seed", config.seed, "instance seed");
    egl->add_option("--instances", config.egl_instances, "random instances")
        ->check(CLI::PositiveNumber);
    egl->add_option("--max-batch", config.egl_max_batch, "batch cap")
        ->check(CLI::PositiveNumber);
    egl->add_option("--max-channels", config.egl_max_channels, "channel cap")
        ->check(CLI::PositiveNumber);
    egl->add_option("--max-spatial", config.egl_max_spatial, "height/width cap")
        ->check(CLI::PositiveNumber);
    egl->add_option("--step", config.egl_step, "finite-difference step")
        ->check(CLI::PositiveNumber);
    egl->add_option("--tolerance", config.egl_tolerance, "max relative error")
        ->check(CLI::PositiveNumber);
    add_common(egl, config);

    CLI11_PARSE(app, argc, argv);

    if (exposure->parsed()) config.command = xeval::Command::kExposure;
    if (eval->parsed()) config.command = xeval::Command::kEval;
    if (merge->parsed()) config.command = xeval::Command::kMerge;
    if (stats->parsed()) config.command = xeval::Command::kStats;
    if (split->parsed()) config.command = xeval::Command::kSplit;
    if (egl->parsed()) config.command = xeval::Command::kEglCheck;
    config.averaging =
        averaging_str == "micro" ? xeval::Averaging::kMicro : xeval::Averaging::kMacro;

    return xeval::run(config);
}
