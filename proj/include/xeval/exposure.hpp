#pragma once

#include <cstdint>
#include <vector>

#include "xeval/types.hpp"

namespace xeval {

// Per-pixel exposure magnitude in [0,1], row-major. Values near 0 are
// under-exposed, values near 1 over-exposed.
struct ExposureMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    double at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
};

// G half-open intervals [e_g, e_{g+1}) covering [0,1]; the last interval
// is closed at 1 so every exposure value has exactly one bin.
struct ExposureBins {
    int bin_count = 0;
    std::vector<double> edges;  // bin_count + 1 values, 0 = e_0 < ... < e_G = 1

    // Equal-width bins; the usual configuration is uniform(10).
    static ExposureBins uniform(int bin_count);

    void validate() const;  // throws format_error on a malformed edge vector
};

// Exposure of a pixel is the HSV value channel: max(R,G,B)/255.
ExposureMap exposure_map(const RgbImage& image);

// Bin containing `value`. Throws std::domain_error outside [0,1].
int bin_index(double value, const ExposureBins& bins);

// Per-bin pixel counts of one exposure map. Counts always sum to the
// pixel count, and per-image counts from different images may be added
// in any order.
std::vector<std::uint64_t> bin_counts(const ExposureMap& map, const ExposureBins& bins);

// Average per-bin pixel counts over a set of same-sized images.
// Throws format_error when `images` is empty or dimensions are mixed.
std::vector<double> exposure_histogram(const std::vector<RgbImage>& images,
                                       const ExposureBins& bins);

// Averaging step for pre-computed per-image counts (parallel path).
std::vector<double> average_bin_counts(const std::vector<std::uint64_t>& total_counts,
                                       std::size_t image_count);

}  // namespace xeval
