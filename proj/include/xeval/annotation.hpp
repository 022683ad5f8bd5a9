#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "xeval/types.hpp"

namespace xeval {

enum class Resolution {
    kAgreeAccepted,       // both annotators agreed, reviewer did not object
    kMajoritySelected,    // reviewer sided with one of the two annotations
    kDiscussionRequired,  // no two voters agree; needs a manual pass
};

const char* resolution_name(Resolution r);

struct ConsensusDecision {
    std::size_t pixel = 0;
    std::uint8_t a_label = 0;
    std::uint8_t b_label = 0;
    std::uint8_t final_label = 0;
    Resolution resolution = Resolution::kAgreeAccepted;
};

// Sparse reviewer corrections: pixel index -> label id (or kInvalidLabel).
// Ordered so decision logs come out in pixel order.
using OverrideMap = std::map<std::size_t, std::uint8_t>;

struct MergeResult {
    LabelMap merged;
    // One entry per pixel where anything non-trivial happened (the two
    // annotations differ, or an override exists). Ascending pixel order.
    std::vector<ConsensusDecision> decisions;
};

// Three-annotator consensus. Per pixel, with votes {a, b, override?}:
//   - at least two votes of kInvalidLabel -> invalid wins outright;
//   - a == b and no objection -> keep;
//   - a != b and the override matches one side -> majority win;
//   - otherwise no two voters agree -> the pixel is emitted as
//     kInvalidLabel (or as the override when one exists) and flagged
//     kDiscussionRequired for a later manual pass. A label never appears
//     in the output unless some voter proposed it.
// Throws format_error on dimension or class-count mismatch, or on
// out-of-range overrides.
MergeResult merge_annotations(const LabelMap& a, const LabelMap& b,
                              const OverrideMap& overrides);

struct DisagreementStats {
    std::uint64_t total_pixels = 0;
    std::uint64_t differing_pixels = 0;  // count of a != b
    // Among differing pixels, fraction whose final label matches neither
    // annotation (the reviewer rejected both).
    double corrected_among_differing = 0.0;
    // class -> (pixels finally labeled c where an annotator disagreed)
    //          / (pixels finally labeled c). Invalid finals excluded.
    std::map<int, double> per_class_error;
};

// Mergeable raw counts behind DisagreementStats, so per-image partials
// can be combined in any order.
struct DisagreementCounts {
    std::uint64_t total_pixels = 0;
    std::uint64_t differing_pixels = 0;
    std::uint64_t corrected_pixels = 0;
    std::vector<std::uint64_t> class_error_pixels;  // size class_count
    std::vector<std::uint64_t> class_total_pixels;  // size class_count

    void accumulate(const LabelMap& a, const LabelMap& b, const LabelMap& final_map);
    void merge(const DisagreementCounts& other);
    DisagreementStats finalize() const;
};

// Convenience single-shot form. Throws format_error on dimension mismatch.
DisagreementStats disagreement_stats(const LabelMap& a, const LabelMap& b,
                                     const LabelMap& final_map);

}  // namespace xeval
