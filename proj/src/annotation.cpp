#include "xeval/annotation.hpp"

#include <string>

#include "xeval/error.hpp"

namespace xeval {

const char* resolution_name(Resolution r) {
    switch (r) {
        case Resolution::kAgreeAccepted: return "agree-accepted";
        case Resolution::kMajoritySelected: return "majority-selected";
        case Resolution::kDiscussionRequired: return "discussion-required";
    }
    return "unknown";
}

namespace {

void require_same_geometry(const LabelMap& a, const LabelMap& b, const char* what) {
    if (a.width != b.width || a.height != b.height) {
        throw format_error(std::string(what) + ": dimension mismatch");
    }
    if (a.class_count != b.class_count) {
        throw format_error(std::string(what) + ": class count mismatch");
    }
}

struct PixelDecision {
    std::uint8_t final_label;
    Resolution resolution;
};

// Consensus rule for one pixel. `has_override`/`override_label` carry the
// reviewer's vote when present.
PixelDecision decide(std::uint8_t a, std::uint8_t b, bool has_override,
                     std::uint8_t override_label) {
    const int invalid_votes = (a == kInvalidLabel) + (b == kInvalidLabel) +
                              (has_override && override_label == kInvalidLabel);
    if (invalid_votes >= 2) {
        // Invalid majority beats everything, including a reviewer label
        // that contradicts two invalid votes.
        if (a == b && (!has_override || override_label == a)) {
            return {kInvalidLabel, Resolution::kAgreeAccepted};
        }
        if (a != b && has_override && (override_label == a || override_label == b)) {
            return {kInvalidLabel, Resolution::kMajoritySelected};
        }
        return {kInvalidLabel, Resolution::kDiscussionRequired};
    }

    if (a == b) {
        if (!has_override || override_label == a) {
            return {a, Resolution::kAgreeAccepted};
        }
        // Reviewer rejects the agreed label: needs a live discussion, the
        // reviewer's proposal stands in the meantime.
        return {override_label, Resolution::kDiscussionRequired};
    }

    if (!has_override) {
        // Split vote and nobody to break the tie; never invent a label.
        return {kInvalidLabel, Resolution::kDiscussionRequired};
    }
    if (override_label == a || override_label == b) {
        return {override_label, Resolution::kMajoritySelected};
    }
    return {override_label, Resolution::kDiscussionRequired};
}

}  // namespace

MergeResult merge_annotations(const LabelMap& a, const LabelMap& b,
                              const OverrideMap& overrides) {
    require_same_geometry(a, b, "merge_annotations");
    validate_label_map(a, "merge_annotations: annotation A");
    validate_label_map(b, "merge_annotations: annotation B");

    const std::size_t pixels = a.pixel_count();
    for (const auto& [pixel, label] : overrides) {
        if (pixel >= pixels) {
            throw format_error("merge_annotations: override pixel " +
                               std::to_string(pixel) + " out of bounds");
        }
        if (label != kInvalidLabel && label >= a.class_count) {
            throw format_error("merge_annotations: override label " +
                               std::to_string(label) + " out of range");
        }
    }

    MergeResult result;
    result.merged.width = a.width;
    result.merged.height = a.height;
    result.merged.class_count = a.class_count;
    result.merged.labels.resize(pixels);

    auto next_override = overrides.begin();
    for (std::size_t p = 0; p < pixels; ++p) {
        bool has_override = false;
        std::uint8_t override_label = 0;
        if (next_override != overrides.end() && next_override->first == p) {
            has_override = true;
            override_label = next_override->second;
            ++next_override;
        }

        const std::uint8_t va = a.labels[p];
        const std::uint8_t vb = b.labels[p];
        const PixelDecision d = decide(va, vb, has_override, override_label);
        result.merged.labels[p] = d.final_label;

        if (va != vb || has_override) {
            result.decisions.push_back({p, va, vb, d.final_label, d.resolution});
        }
    }
    return result;
}

void DisagreementCounts::accumulate(const LabelMap& a, const LabelMap& b,
                                    const LabelMap& final_map) {
    require_same_geometry(a, b, "disagreement_stats");
    require_same_geometry(a, final_map, "disagreement_stats");
    if (class_error_pixels.empty()) {
        class_error_pixels.assign(a.class_count, 0);
        class_total_pixels.assign(a.class_count, 0);
    }

    const std::size_t pixels = a.pixel_count();
    total_pixels += pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
        const std::uint8_t va = a.labels[p];
        const std::uint8_t vb = b.labels[p];
        const std::uint8_t vf = final_map.labels[p];
        if (va != vb) {
            ++differing_pixels;
            if (vf != va && vf != vb) ++corrected_pixels;
        }
        if (vf != kInvalidLabel) {
            ++class_total_pixels[vf];
            if (va != vf || vb != vf) ++class_error_pixels[vf];
        }
    }
}

void DisagreementCounts::merge(const DisagreementCounts& other) {
    if (class_error_pixels.empty()) {
        class_error_pixels.assign(other.class_error_pixels.size(), 0);
        class_total_pixels.assign(other.class_total_pixels.size(), 0);
    }
    if (class_error_pixels.size() != other.class_error_pixels.size()) {
        throw format_error("disagreement counts: class count mismatch in merge");
    }
    total_pixels += other.total_pixels;
    differing_pixels += other.differing_pixels;
    corrected_pixels += other.corrected_pixels;
    for (std::size_t c = 0; c < class_error_pixels.size(); ++c) {
        class_error_pixels[c] += other.class_error_pixels[c];
        class_total_pixels[c] += other.class_total_pixels[c];
    }
}

DisagreementStats DisagreementCounts::finalize() const {
    DisagreementStats stats;
    stats.total_pixels = total_pixels;
    stats.differing_pixels = differing_pixels;
    stats.corrected_among_differing =
        differing_pixels == 0
            ? 0.0
            : static_cast<double>(corrected_pixels) / static_cast<double>(differing_pixels);
    for (std::size_t c = 0; c < class_total_pixels.size(); ++c) {
        if (class_total_pixels[c] == 0) continue;
        stats.per_class_error[static_cast<int>(c)] =
            static_cast<double>(class_error_pixels[c]) /
            static_cast<double>(class_total_pixels[c]);
    }
    return stats;
}

DisagreementStats disagreement_stats(const LabelMap& a, const LabelMap& b,
                                     const LabelMap& final_map) {
    DisagreementCounts counts;
    counts.accumulate(a, b, final_map);
    return counts.finalize();
}

}  // namespace xeval
