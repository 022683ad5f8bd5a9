#include "xeval/metrics.hpp"

#include <stdexcept>
#include <string>

#include "xeval/error.hpp"

namespace xeval {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (std::uint64_t v : counts) sum += v;
    return sum;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (class_count != other.class_count) {
        throw format_error("confusion matrix: class count mismatch in merge");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

GroupedConfusion::GroupedConfusion(ExposureBins b, int class_count) : bins(std::move(b)) {
    bins.validate();
    if (class_count <= 0 || class_count > 255) {
        throw format_error("grouped confusion: class count must be in [1,255]");
    }
    per_bin.assign(bins.bin_count, ConfusionMatrix(class_count));
}

void GroupedConfusion::accumulate(const LabelMap& gt, const LabelMap& pred,
                                  const ExposureMap& exposure) {
    if (per_bin.empty()) throw format_error("grouped confusion: not initialized");
    const int classes = per_bin.front().class_count;
    if (gt.width != pred.width || gt.height != pred.height ||
        gt.width != exposure.width || gt.height != exposure.height) {
        throw format_error("accumulate: dimension mismatch between gt, pred and exposure");
    }
    if (gt.class_count != classes || pred.class_count != classes) {
        throw format_error("accumulate: class count mismatch");
    }

    const std::size_t pixels = gt.pixel_count();
    for (std::size_t p = 0; p < pixels; ++p) {
        const std::uint8_t t = gt.labels[p];
        const std::uint8_t q = pred.labels[p];
        if (q == kInvalidLabel) {
            throw format_error("accumulate: prediction contains the invalid label at pixel " +
                               std::to_string(p));
        }
        if (q >= classes) {
            throw format_error("accumulate: prediction id out of range at pixel " +
                               std::to_string(p));
        }
        if (t == kInvalidLabel) continue;
        if (t >= classes) {
            throw format_error("accumulate: ground-truth id out of range at pixel " +
                               std::to_string(p));
        }
        const int g = bin_index(exposure.values[p], bins);
        ++per_bin[g].at(t, q);
    }
}

void GroupedConfusion::merge(const GroupedConfusion& other) {
    if (bins.bin_count != other.bins.bin_count || bins.edges != other.bins.edges) {
        throw format_error("grouped confusion: bin mismatch in merge");
    }
    for (std::size_t g = 0; g < per_bin.size(); ++g) per_bin[g].merge(other.per_bin[g]);
}

ConfusionMatrix GroupedConfusion::bin_sum() const {
    ConfusionMatrix sum(per_bin.empty() ? 0 : per_bin.front().class_count);
    for (const ConfusionMatrix& m : per_bin) sum.merge(m);
    return sum;
}

std::vector<std::uint64_t> GroupedConfusion::group_pixel_counts() const {
    std::vector<std::uint64_t> counts(per_bin.size(), 0);
    for (std::size_t g = 0; g < per_bin.size(); ++g) counts[g] = per_bin[g].total();
    return counts;
}

std::uint64_t GroupedConfusion::total() const {
    std::uint64_t sum = 0;
    for (const ConfusionMatrix& m : per_bin) sum += m.total();
    return sum;
}

const char* averaging_name(Averaging a) {
    return a == Averaging::kMacro ? "macro" : "micro";
}

IouResult iou(const GroupedConfusion& acc) {
    const ConfusionMatrix sum = acc.bin_sum();
    const int classes = sum.class_count;
    IouResult result;
    double iou_total = 0.0;
    int present = 0;
    for (int c = 0; c < classes; ++c) {
        const std::uint64_t tp = sum.at(c, c);
        std::uint64_t row = 0, col = 0;
        for (int j = 0; j < classes; ++j) {
            row += sum.at(c, j);
            col += sum.at(j, c);
        }
        const std::uint64_t uni = row + col - tp;  // TP + FP + FN
        if (uni == 0) continue;
        const double v = static_cast<double>(tp) / static_cast<double>(uni);
        result.per_class[c] = v;
        iou_total += v;
        ++present;
    }
    if (present == 0) {
        throw metric_error("iou: no class has any ground-truth or predicted pixel");
    }
    result.miou = iou_total / present;
    return result;
}

namespace {

double fbeta(double precision, double recall, double beta_sq) {
    const double denom = beta_sq * precision + recall;
    if (denom == 0.0) return 0.0;
    return (1.0 + beta_sq) * precision * recall / denom;
}

// Group precision/recall under the chosen averaging mode.
void group_precision_recall(const ConfusionMatrix& m, Averaging averaging,
                            double& precision, double& recall) {
    const int classes = m.class_count;
    if (averaging == Averaging::kMicro) {
        std::uint64_t trace = 0;
        for (int c = 0; c < classes; ++c) trace += m.at(c, c);
        const std::uint64_t total = m.total();
        // Single-label multi-class: pooled FP and FN coincide, so both
        // ratios reduce to accuracy.
        precision = recall = static_cast<double>(trace) / static_cast<double>(total);
        return;
    }

    double precision_sum = 0.0;
    double recall_sum = 0.0;
    int supported = 0;
    for (int c = 0; c < classes; ++c) {
        std::uint64_t row = 0, col = 0;
        for (int j = 0; j < classes; ++j) {
            row += m.at(c, j);  // TP + FN
            col += m.at(j, c);  // TP + FP
        }
        if (row == 0) continue;  // class absent from ground truth in this group
        const std::uint64_t tp = m.at(c, c);
        precision_sum += col == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
        recall_sum += static_cast<double>(tp) / static_cast<double>(row);
        ++supported;
    }
    precision = precision_sum / supported;
    recall = recall_sum / supported;
}

}  // namespace

double ef1_from_precision_recall(double precision, double recall, double beta) {
    if (!(beta > 0.0)) throw std::domain_error("ef1: beta must be positive");
    return fbeta(precision, recall, beta * beta);
}

Ef1Result ef1(const GroupedConfusion& acc, double beta, Averaging averaging) {
    if (!(beta > 0.0)) throw std::domain_error("ef1: beta must be positive");
    const double beta_sq = beta * beta;

    Ef1Result result;
    result.per_group.assign(acc.per_bin.size(), std::nullopt);
    double sum = 0.0;
    for (std::size_t g = 0; g < acc.per_bin.size(); ++g) {
        const ConfusionMatrix& m = acc.per_bin[g];
        if (m.total() == 0) continue;
        double precision = 0.0, recall = 0.0;
        group_precision_recall(m, averaging, precision, recall);
        const double v = fbeta(precision, recall, beta_sq);
        result.per_group[g] = v;
        sum += v;
        ++result.populated;
    }
    if (result.populated == 0) {
        throw metric_error("ef1: every exposure group is empty");
    }
    result.mean = sum / result.populated;
    return result;
}

EvalReport evaluate(const GroupedConfusion& acc, double beta, Averaging averaging) {
    EvalReport report;
    const IouResult iou_result = iou(acc);
    report.per_class_iou = iou_result.per_class;
    report.miou = iou_result.miou;
    const Ef1Result ef1_result = ef1(acc, beta, averaging);
    report.ef1_per_group = ef1_result.per_group;
    report.mef1 = ef1_result.mean;
    report.populated_groups = ef1_result.populated;
    report.group_pixel_counts = acc.group_pixel_counts();
    report.averaging = averaging;
    report.beta = beta;
    return report;
}

LabelMap resize_labels(const LabelMap& map, int new_width, int new_height) {
    if (new_width <= 0 || new_height <= 0) {
        throw std::domain_error("resize_labels: target dimensions must be positive");
    }
    LabelMap out;
    out.width = new_width;
    out.height = new_height;
    out.class_count = map.class_count;
    out.labels.resize(out.pixel_count());
    for (int y = 0; y < new_height; ++y) {
        const std::size_t src_y =
            static_cast<std::size_t>(y) * map.height / new_height;
        const std::uint8_t* src_row = map.labels.data() + src_y * map.width;
        std::uint8_t* dst_row = out.labels.data() + static_cast<std::size_t>(y) * new_width;
        for (int x = 0; x < new_width; ++x) {
            dst_row[x] = src_row[static_cast<std::size_t>(x) * map.width / new_width];
        }
    }
    return out;
}

}  // namespace xeval
