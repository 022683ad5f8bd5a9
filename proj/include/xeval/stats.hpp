#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xeval/types.hpp"

namespace xeval {

struct DatasetEntry {
    std::string image_path;
    std::string label_path;
    std::string city;  // optional tag, empty when absent
};

struct DatasetIndex {
    std::vector<DatasetEntry> entries;
    int class_count = kDefaultClassCount;
};

// Manifest format: one entry per line, `image<TAB>label[<TAB>city]`.
DatasetIndex parse_manifest(const std::string& text, int class_count = kDefaultClassCount);
std::string write_manifest(const DatasetIndex& index);

// Per-entry pixel tallies; the unit everything downstream merges.
struct EntryHistogram {
    DatasetEntry entry;
    std::vector<std::uint64_t> class_pixels;  // size class_count
    std::uint64_t invalid_pixels = 0;
    std::uint64_t total_pixels = 0;
};

EntryHistogram entry_histogram(const DatasetEntry& entry, const LabelMap& labels);

struct ClassDistribution {
    std::map<int, std::uint64_t> per_class_pixels;
    std::map<int, double> log_scale_view;  // log10 of counts, absent for zero
};

ClassDistribution class_distribution(const std::vector<EntryHistogram>& histograms);

// Invalid pixels over all pixels. Throws metric_error on an empty set.
double invalid_ratio(const std::vector<EntryHistogram>& histograms);

// train = round(n * train_fraction), test = the rest. Throws
// std::domain_error when the fraction or n degenerates to an empty side.
struct SplitSizes {
    std::size_t train = 0;
    std::size_t test = 0;
};
SplitSizes split_sizes(std::size_t n, double train_fraction);

struct SplitResult {
    std::vector<std::size_t> train_indices;  // ascending
    std::vector<std::size_t> test_indices;   // ascending
    double divergence = 0.0;  // max L1 distance of either side to the full set
    std::vector<double> full_distribution;
    std::vector<double> train_distribution;
    std::vector<double> test_distribution;
};

// Deterministic stratified split: a seeded greedy pass assigns entries
// (largest first) to the side whose class-pixel distribution it improves
// most, under the size constraint, followed by a swap-refinement pass
// that lowers the divergence until no single exchange helps. Identical
// seed and input give identical output.
SplitResult stratified_split(const std::vector<EntryHistogram>& histograms,
                             double train_fraction, std::uint64_t seed);

// L1 distance between the normalized class-pixel distributions of a
// count vector and a reference distribution.
double l1_divergence(const std::vector<std::uint64_t>& counts,
                     const std::vector<double>& reference);

std::map<std::string, std::uint64_t> per_city_counts(const std::vector<EntryHistogram>& histograms);

}  // namespace xeval
