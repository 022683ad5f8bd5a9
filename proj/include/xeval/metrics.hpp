#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "xeval/exposure.hpp"
#include "xeval/types.hpp"

namespace xeval {

// counts[t][p] = pixels with ground truth t predicted as p.
struct ConfusionMatrix {
    int class_count = 0;
    std::vector<std::uint64_t> counts;  // row-major, class_count^2

    explicit ConfusionMatrix(int classes = 0)
        : class_count(classes),
          counts(static_cast<std::size_t>(classes) * classes, 0) {}

    std::uint64_t& at(int truth, int predicted) {
        return counts[static_cast<std::size_t>(truth) * class_count + predicted];
    }
    std::uint64_t at(int truth, int predicted) const {
        return counts[static_cast<std::size_t>(truth) * class_count + predicted];
    }
    std::uint64_t total() const;
    void merge(const ConfusionMatrix& other);
};

// One confusion matrix per exposure bin. Mergeable, so a dataset can be
// accumulated per image in parallel and reduced in any order.
struct GroupedConfusion {
    ExposureBins bins;
    std::vector<ConfusionMatrix> per_bin;

    GroupedConfusion() = default;
    GroupedConfusion(ExposureBins b, int class_count);

    // Adds every pixel with a valid ground-truth label to the bin of its
    // exposure value. Invalid ground truth contributes nowhere.
    // Throws format_error on dimension mismatch, on invalid labels in
    // `pred`, or on out-of-range ids.
    void accumulate(const LabelMap& gt, const LabelMap& pred, const ExposureMap& exposure);

    void merge(const GroupedConfusion& other);

    ConfusionMatrix bin_sum() const;
    std::vector<std::uint64_t> group_pixel_counts() const;
    std::uint64_t total() const;
};

enum class Averaging { kMacro, kMicro };

const char* averaging_name(Averaging a);

struct IouResult {
    std::map<int, double> per_class;  // only classes with nonzero union
    double miou = 0.0;
};

// IoU_c = TP / (TP + FP + FN) over the bin-summed matrix; classes with an
// empty union are left out of the mean. Throws metric_error when every
// class is absent.
IouResult iou(const GroupedConfusion& acc);

struct Ef1Result {
    std::vector<std::optional<double>> per_group;  // nullopt for empty bins
    double mean = 0.0;    // over populated groups only
    int populated = 0;
};

// The F-measure itself:
//   (1+beta^2) * precision * recall / (beta^2 * precision + recall),
// 0 when the denominator vanishes. Throws std::domain_error for beta <= 0.
double ef1_from_precision_recall(double precision, double recall, double beta);

// F-measure of per-group precision/recall. Macro averaging takes
// precision/recall as class means over classes with ground-truth support
// in the group; micro pools all pixels, which makes EF1_g collapse to
// per-group accuracy. Empty groups are skipped rather than scored 0.
// Throws std::domain_error for beta <= 0 and metric_error when no group
// has pixels.
Ef1Result ef1(const GroupedConfusion& acc, double beta, Averaging averaging);

struct EvalReport {
    std::map<int, double> per_class_iou;
    double miou = 0.0;
    std::vector<std::optional<double>> ef1_per_group;
    double mef1 = 0.0;
    std::vector<std::uint64_t> group_pixel_counts;
    Averaging averaging = Averaging::kMacro;
    double beta = 1.0;
    int populated_groups = 0;
};

EvalReport evaluate(const GroupedConfusion& acc, double beta, Averaging averaging);

// Nearest-neighbour resampling: output pixel (x,y) copies input pixel
// (x*src_w/dst_w, y*src_h/dst_h), floored. Never invents a label.
LabelMap resize_labels(const LabelMap& map, int new_width, int new_height);

}  // namespace xeval
