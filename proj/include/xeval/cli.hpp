#pragma once

#include <cstdint>
#include <string>

#include "xeval/metrics.hpp"

namespace xeval {

enum class Command { kExposure, kEval, kMerge, kStats, kSplit, kEglCheck };

struct RunConfig {
    Command command = Command::kEval;

    // Inputs; which ones apply depends on the command.
    std::string manifest_path;
    std::string image_dir;
    std::string gt_dir;
    std::string pred_dir;
    std::string a_dir;
    std::string b_dir;
    std::string overrides_dir;
    std::string classes_path;

    std::string out_dir;

    int bin_count = 10;
    Averaging averaging = Averaging::kMacro;
    double beta = 1.0;
    std::uint64_t seed = 1;
    double train_fraction = 0.6977;
    int jobs = 1;
    bool plot = false;

    // egl-check knobs
    int egl_instances = 100;
    int egl_max_batch = 2;
    int egl_max_channels = 8;
    int egl_max_spatial = 8;
    double egl_step = 1e-4;
    double egl_tolerance = 1e-4;
};

// Exit codes, mirrored in the manual.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitBadData = 3;
inline constexpr int kExitMetricUndefined = 4;
inline constexpr int kExitGradCheckFailed = 5;

// Executes one command: writes every declared artifact atomically and
// prints a one-line JSON summary to stdout. Returns an exit code instead
// of throwing; errors go to stderr.
int run(const RunConfig& config);

}  // namespace xeval
