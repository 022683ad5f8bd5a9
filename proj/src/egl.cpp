#include "xeval/egl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "xeval/error.hpp"
#include "xeval/rng.hpp"

namespace xeval {

bool DenseTensor::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_finite(const DenseTensor& t, const char* name) {
    if (!t.all_finite()) {
        throw std::invalid_argument(std::string("egl: non-finite values in ") + name);
    }
}

}  // namespace

EglOutput egl_forward(const DenseTensor& seg_features, const DenseTensor& exp_features,
                      const EglParams& p) {
    if (seg_features.batch != exp_features.batch ||
        seg_features.height != exp_features.height ||
        seg_features.width != exp_features.width) {
        throw std::invalid_argument("egl_forward: batch/spatial shape mismatch");
    }
    if (seg_features.batch <= 0 || seg_features.channels <= 0 ||
        seg_features.height <= 0 || seg_features.width <= 0 || exp_features.channels <= 0) {
        throw std::invalid_argument("egl_forward: empty tensor");
    }
    if (p.kernel.size() != static_cast<std::size_t>(exp_features.channels)) {
        throw std::invalid_argument("egl_forward: kernel length must equal exposure channels");
    }
    require_finite(seg_features, "seg_features");
    require_finite(exp_features, "exp_features");
    if (!std::isfinite(p.bias) || !std::isfinite(p.w1) || !std::isfinite(p.w2)) {
        throw std::invalid_argument("egl_forward: non-finite parameters");
    }
    for (double k : p.kernel) {
        if (!std::isfinite(k)) throw std::invalid_argument("egl_forward: non-finite kernel");
    }

    EglOutput out;
    out.gate = DenseTensor(seg_features.batch, 1, seg_features.height, seg_features.width);
    out.fused = DenseTensor(seg_features.batch, seg_features.channels,
                            seg_features.height, seg_features.width);

    for (int n = 0; n < seg_features.batch; ++n) {
        for (int y = 0; y < seg_features.height; ++y) {
            for (int x = 0; x < seg_features.width; ++x) {
                double z = p.bias;
                for (int c = 0; c < exp_features.channels; ++c) {
                    z += p.kernel[c] * exp_features.at(n, c, y, x);
                }
                const double g = sigmoid(z);
                out.gate.at(n, 0, y, x) = g;
                for (int c = 0; c < seg_features.channels; ++c) {
                    const double s = seg_features.at(n, c, y, x);
                    out.fused.at(n, c, y, x) = p.w1 * s + p.w2 * s * g;
                }
            }
        }
    }

    out.cache = EglCache{seg_features, exp_features, out.gate, p};
    return out;
}

EglGrads egl_backward(const DenseTensor& upstream, const EglCache& cache) {
    const DenseTensor& seg_features = cache.seg_features;
    const DenseTensor& exp_features = cache.exp_features;
    if (!upstream.same_shape(seg_features)) {
        throw std::invalid_argument("egl_backward: upstream shape does not match cached forward");
    }
    if (cache.gate.batch != seg_features.batch || cache.gate.height != seg_features.height ||
        cache.gate.width != seg_features.width || cache.gate.channels != 1 ||
        cache.params.kernel.size() != static_cast<std::size_t>(exp_features.channels)) {
        throw std::invalid_argument("egl_backward: stale or mismatched cache");
    }
    require_finite(upstream, "upstream");

    const EglParams& p = cache.params;
    EglGrads grads;
    grads.d_seg_features = DenseTensor(seg_features.batch, seg_features.channels,
                                       seg_features.height, seg_features.width);
    grads.d_exp_features = DenseTensor(exp_features.batch, exp_features.channels,
                                       exp_features.height, exp_features.width);
    grads.d_kernel.assign(p.kernel.size(), 0.0);

    for (int n = 0; n < seg_features.batch; ++n) {
        for (int y = 0; y < seg_features.height; ++y) {
            for (int x = 0; x < seg_features.width; ++x) {
                const double g = cache.gate.at(n, 0, y, x);
                double d_gate = 0.0;
                for (int c = 0; c < seg_features.channels; ++c) {
                    const double u = upstream.at(n, c, y, x);
                    const double s = seg_features.at(n, c, y, x);
                    grads.d_seg_features.at(n, c, y, x) = u * (p.w1 + p.w2 * g);
                    grads.d_w1 += u * s;
                    grads.d_w2 += u * s * g;
                    d_gate += u * p.w2 * s;
                }
                const double d_z = d_gate * g * (1.0 - g);  // sigmoid'
                grads.d_bias += d_z;
                for (int c = 0; c < exp_features.channels; ++c) {
                    grads.d_kernel[c] += d_z * exp_features.at(n, c, y, x);
                    grads.d_exp_features.at(n, c, y, x) = d_z * p.kernel[c];
                }
            }
        }
    }
    return grads;
}

ExposureMap area_resample(const ExposureMap& map, int new_width, int new_height) {
    if (new_width <= 0 || new_height <= 0) {
        throw std::domain_error("area_resample: target dimensions must be positive");
    }
    if (new_width == map.width && new_height == map.height) return map;

    ExposureMap out;
    out.width = new_width;
    out.height = new_height;
    out.values.resize(out.pixel_count());

    const double scale_x = static_cast<double>(map.width) / new_width;
    const double scale_y = static_cast<double>(map.height) / new_height;
    for (int ty = 0; ty < new_height; ++ty) {
        const double y0 = ty * scale_y;
        const double y1 = (ty + 1) * scale_y;
        for (int tx = 0; tx < new_width; ++tx) {
            const double x0 = tx * scale_x;
            const double x1 = (tx + 1) * scale_x;
            double sum = 0.0;
            for (int sy = static_cast<int>(y0); sy < map.height && sy < y1; ++sy) {
                const double hy = std::min<double>(sy + 1, y1) - std::max<double>(sy, y0);
                if (hy <= 0.0) continue;
                for (int sx = static_cast<int>(x0); sx < map.width && sx < x1; ++sx) {
                    const double wx = std::min<double>(sx + 1, x1) - std::max<double>(sx, x0);
                    if (wx <= 0.0) continue;
                    sum += hy * wx * map.at(sx, sy);
                }
            }
            out.values[static_cast<std::size_t>(ty) * new_width + tx] =
                sum / (scale_x * scale_y);
        }
    }
    return out;
}

CombinedLoss combined_loss(const DenseTensor& seg_logits, const LabelMap& gt,
                           const DenseTensor& exp_pred, const ExposureMap& exp_target,
                           const LossWeights& w) {
    if (seg_logits.batch != 1 || exp_pred.batch != 1 || exp_pred.channels != 1) {
        throw std::invalid_argument("combined_loss: expects batch 1 and a 1-channel exposure map");
    }
    if (seg_logits.height != gt.height || seg_logits.width != gt.width) {
        throw std::invalid_argument("combined_loss: logit/ground-truth shape mismatch");
    }
    if (seg_logits.channels != gt.class_count) {
        throw std::invalid_argument("combined_loss: logit channels must equal class count");
    }
    if (!(w.alpha >= 0.0) || !(w.beta_loss >= 0.0) ||
        !std::isfinite(w.alpha) || !std::isfinite(w.beta_loss)) {
        throw std::invalid_argument("combined_loss: loss weights must be finite and non-negative");
    }
    require_finite(seg_logits, "seg_logits");
    require_finite(exp_pred, "exp_pred");

    const int classes = seg_logits.channels;
    double ce_sum = 0.0;
    std::size_t valid = 0;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            const std::uint8_t t = gt.at(x, y);
            if (t == kInvalidLabel) continue;
            // Stable log-softmax: shift by the max logit before exponentiating.
            double max_logit = seg_logits.at(0, 0, y, x);
            for (int c = 1; c < classes; ++c) {
                max_logit = std::max(max_logit, seg_logits.at(0, c, y, x));
            }
            double sum_exp = 0.0;
            for (int c = 0; c < classes; ++c) {
                sum_exp += std::exp(seg_logits.at(0, c, y, x) - max_logit);
            }
            ce_sum += std::log(sum_exp) - (seg_logits.at(0, t, y, x) - max_logit);
            ++valid;
        }
    }
    if (valid == 0) throw metric_error("combined_loss: no valid ground-truth pixel");

    const ExposureMap target =
        area_resample(exp_target, exp_pred.width, exp_pred.height);
    double l1_sum = 0.0;
    for (std::size_t i = 0; i < target.values.size(); ++i) {
        l1_sum += std::abs(exp_pred.values[i] - target.values[i]);
    }

    CombinedLoss loss;
    loss.seg_ce = ce_sum / static_cast<double>(valid);
    loss.exp_l1 = l1_sum / static_cast<double>(target.values.size());
    loss.total = w.alpha * loss.seg_ce + w.beta_loss * loss.exp_l1;
    return loss;
}

namespace {

DenseTensor random_tensor(int n, int c, int h, int w, SplitMix64& rng) {
    DenseTensor t(n, c, h, w);
    for (double& v : t.values) v = rng.uniform() * 2.0 - 1.0;
    return t;
}

// Norm-wise relative error; near-zero pairs compare absolutely.
double rel_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
        na += analytic[i] * analytic[i];
        nn += numeric[i] * numeric[i];
    }
    diff = std::sqrt(diff);
    const double denom = std::sqrt(na) + std::sqrt(nn);
    return denom < 1e-10 ? diff : diff / denom;
}

}  // namespace

GradCheckResult check_egl_gradients(const GradCheckConfig& config) {
    SplitMix64 rng(config.seed);
    GradCheckResult result;
    result.instances = config.instances;
    result.tolerance = config.tolerance;
    result.groups = {{"seg_features", 0.0}, {"exp_features", 0.0}, {"kernel", 0.0},
                     {"bias", 0.0}, {"w1", 0.0},  {"w2", 0.0}};

    for (int inst = 0; inst < config.instances; ++inst) {
        const int n = 1 + static_cast<int>(rng.bounded(config.max_batch));
        const int cs = 1 + static_cast<int>(rng.bounded(config.max_channels));
        const int ce = 1 + static_cast<int>(rng.bounded(config.max_channels));
        const int h = 1 + static_cast<int>(rng.bounded(config.max_spatial));
        const int w = 1 + static_cast<int>(rng.bounded(config.max_spatial));

        DenseTensor seg_features = random_tensor(n, cs, h, w, rng);
        DenseTensor exp_features = random_tensor(n, ce, h, w, rng);
        EglParams params;
        params.kernel.resize(ce);
        for (double& k : params.kernel) k = rng.uniform() * 2.0 - 1.0;
        params.bias = rng.uniform() * 2.0 - 1.0;
        params.w1 = rng.uniform() * 2.0 - 1.0;
        params.w2 = rng.uniform() * 2.0 - 1.0;

        // Scalar probe L = sum(upstream .* fused); analytic gradients are
        // exactly what backward reports against this upstream.
        const DenseTensor upstream = random_tensor(n, cs, h, w, rng);
        auto probe = [&](const DenseTensor& s, const DenseTensor& e, const EglParams& q) {
            const EglOutput out = egl_forward(s, e, q);
            double L = 0.0;
            for (std::size_t i = 0; i < out.fused.values.size(); ++i) {
                L += upstream.values[i] * out.fused.values[i];
            }
            return L;
        };

        const EglOutput out = egl_forward(seg_features, exp_features, params);
        const EglGrads grads = egl_backward(upstream, out.cache);

        const double step = config.step;
        auto central = [&](auto&& set, double original) {
            set(original + step);
            const double up = probe(seg_features, exp_features, params);
            set(original - step);
            const double down = probe(seg_features, exp_features, params);
            set(original);
            return (up - down) / (2.0 * step);
        };

        std::vector<double> fd;
        fd.reserve(seg_features.size());
        for (std::size_t i = 0; i < seg_features.size(); ++i) {
            fd.push_back(
                central([&](double v) { seg_features.values[i] = v; }, seg_features.values[i]));
        }
        result.groups[0].max_rel_error =
            std::max(result.groups[0].max_rel_error, rel_error(grads.d_seg_features.values, fd));

        fd.clear();
        for (std::size_t i = 0; i < exp_features.size(); ++i) {
            fd.push_back(
                central([&](double v) { exp_features.values[i] = v; }, exp_features.values[i]));
        }
        result.groups[1].max_rel_error =
            std::max(result.groups[1].max_rel_error, rel_error(grads.d_exp_features.values, fd));

        fd.clear();
        for (std::size_t i = 0; i < params.kernel.size(); ++i) {
            fd.push_back(central([&](double v) { params.kernel[i] = v; }, params.kernel[i]));
        }
        result.groups[2].max_rel_error =
            std::max(result.groups[2].max_rel_error, rel_error(grads.d_kernel, fd));

        const double fd_bias = central([&](double v) { params.bias = v; }, params.bias);
        result.groups[3].max_rel_error = std::max(
            result.groups[3].max_rel_error, rel_error({grads.d_bias}, {fd_bias}));

        const double fd_w1 = central([&](double v) { params.w1 = v; }, params.w1);
        result.groups[4].max_rel_error =
            std::max(result.groups[4].max_rel_error, rel_error({grads.d_w1}, {fd_w1}));

        const double fd_w2 = central([&](double v) { params.w2 = v; }, params.w2);
        result.groups[5].max_rel_error =
            std::max(result.groups[5].max_rel_error, rel_error({grads.d_w2}, {fd_w2}));
    }

    result.passed = true;
    for (const auto& group : result.groups) {
        if (!(group.max_rel_error < config.tolerance)) result.passed = false;
    }
    return result;
}

}  // namespace xeval
