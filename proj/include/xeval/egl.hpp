#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xeval/exposure.hpp"
#include "xeval/types.hpp"

namespace xeval {

// Small dense NCHW tensor of doubles. Desk-scale numerical reference
// only; nothing here is tuned for throughput.
struct DenseTensor {
    int batch = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    DenseTensor() = default;
    DenseTensor(int n, int c, int h, int w)
        : batch(n), channels(c), height(h), width(w),
          values(static_cast<std::size_t>(n) * c * h * w, 0.0) {}

    std::size_t size() const { return values.size(); }
    std::size_t index(int n, int c, int y, int x) const {
        return ((static_cast<std::size_t>(n) * channels + c) * height + y) * width + x;
    }
    double at(int n, int c, int y, int x) const { return values[index(n, c, y, x)]; }
    double& at(int n, int c, int y, int x) { return values[index(n, c, y, x)]; }

    bool same_shape(const DenseTensor& o) const {
        return batch == o.batch && channels == o.channels &&
               height == o.height && width == o.width;
    }
    bool all_finite() const;
};

// Parameters of the guidance layer. With a 1x1 convolution producing a
// single-channel spatial gate:
//   gate  = sigmoid(kernel . exp_features + bias)
//   fused = w1 * seg_features + w2 * (seg_features * gate)
// where the gate broadcasts across the segmentation-feature channels.
struct EglParams {
    std::vector<double> kernel;  // one weight per exposure-feature channel
    double bias = 0.0;
    double w1 = 1.0;
    double w2 = 0.3;
};

struct LossWeights {
    double alpha = 1.0;      // weight of the segmentation cross-entropy
    double beta_loss = 0.01; // weight of the exposure l1 term
};

// Immutable state captured by a forward call; backward consumes it.
struct EglCache {
    DenseTensor seg_features;
    DenseTensor exp_features;
    DenseTensor gate;  // (batch, 1, H, W), values strictly in (0,1)
    EglParams params;
};

struct EglOutput {
    DenseTensor fused;  // same shape as seg_features
    DenseTensor gate;   // (batch, 1, H, W)
    EglCache cache;
};

// Throws std::invalid_argument on shape mismatch or non-finite input.
EglOutput egl_forward(const DenseTensor& seg_features, const DenseTensor& exp_features,
                      const EglParams& p);

struct EglGrads {
    DenseTensor d_seg_features;
    DenseTensor d_exp_features;
    std::vector<double> d_kernel;
    double d_bias = 0.0;
    double d_w1 = 0.0;
    double d_w2 = 0.0;
};

// Analytic gradients of the fused output with respect to every input and
// parameter, contracted against `upstream` (dL/dfused). The cache must
// come from the matching forward call; a shape mismatch throws
// std::invalid_argument.
EglGrads egl_backward(const DenseTensor& upstream, const EglCache& cache);

struct CombinedLoss {
    double total = 0.0;
    double seg_ce = 0.0;  // mean cross-entropy over valid pixels
    double exp_l1 = 0.0;  // mean absolute error over all pixels
};

// total = alpha * seg_ce + beta_loss * exp_l1. Logits are (1, C, H, W)
// with a softmax over the class axis; pixels whose ground truth is
// kInvalidLabel are excluded from the cross-entropy. When the exposure
// target is larger than the prediction it is box-downsampled first.
// Throws metric_error when no valid pixel exists.
CombinedLoss combined_loss(const DenseTensor& seg_logits, const LabelMap& gt,
                           const DenseTensor& exp_pred, const ExposureMap& exp_target,
                           const LossWeights& w);

// Area-weighted box resampling of an exposure map to a new resolution.
ExposureMap area_resample(const ExposureMap& map, int new_width, int new_height);

// Randomized finite-difference verification of egl_backward.
struct GradCheckConfig {
    std::uint64_t seed = 1;
    int instances = 100;
    int max_batch = 2;
    int max_channels = 8;
    int max_spatial = 8;
    double step = 1e-4;
    double tolerance = 1e-4;
};

struct GradCheckResult {
    struct Group {
        std::string name;
        double max_rel_error = 0.0;
    };
    std::vector<Group> groups;  // seg_features, exp_features, kernel, bias, w1, w2
    int instances = 0;
    bool passed = false;
    double tolerance = 0.0;
};

// Compares every analytic gradient against central finite differences of
// the forward pass. The error per parameter group is the norm-wise
// relative error ||a - n|| / (||a|| + ||n||), reported as the maximum
// over all instances.
GradCheckResult check_egl_gradients(const GradCheckConfig& config);

}  // namespace xeval
