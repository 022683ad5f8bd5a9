#include "xeval/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "xeval/error.hpp"

namespace xeval {

ExposureBins ExposureBins::uniform(int bin_count) {
    if (bin_count <= 0) throw std::domain_error("bin count must be positive");
    ExposureBins bins;
    bins.bin_count = bin_count;
    bins.edges.resize(bin_count + 1);
    for (int i = 0; i <= bin_count; ++i) {
        bins.edges[i] = static_cast<double>(i) / bin_count;
    }
    bins.edges.front() = 0.0;
    bins.edges.back() = 1.0;
    return bins;
}

void ExposureBins::validate() const {
    if (bin_count <= 0 || edges.size() != static_cast<std::size_t>(bin_count) + 1) {
        throw format_error("exposure bins: edge count must be bin_count + 1");
    }
    if (edges.front() != 0.0 || edges.back() != 1.0) {
        throw format_error("exposure bins: edges must span [0,1]");
    }
    for (int i = 0; i < bin_count; ++i) {
        if (!(edges[i] < edges[i + 1])) {
            throw format_error("exposure bins: edges must be strictly increasing");
        }
    }
}

ExposureMap exposure_map(const RgbImage& image) {
    if (!image.valid()) throw format_error("exposure_map: invalid RGB image");
    ExposureMap map;
    map.width = image.width;
    map.height = image.height;
    map.values.resize(image.pixel_count());
    const std::uint8_t* px = image.pixels.data();
    for (std::size_t i = 0; i < map.values.size(); ++i, px += 3) {
        const std::uint8_t v = std::max({px[0], px[1], px[2]});
        map.values[i] = static_cast<double>(v) / 255.0;
    }
    return map;
}

int bin_index(double value, const ExposureBins& bins) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::domain_error("bin_index: value " + std::to_string(value) +
                                " outside [0,1]");
    }
    // First edge above the value, among e_1..e_G; 1.0 falls past the end
    // and lands in the closed top bin.
    const auto it = std::upper_bound(bins.edges.begin() + 1, bins.edges.end(), value);
    const int g = static_cast<int>(it - (bins.edges.begin() + 1));
    return std::min(g, bins.bin_count - 1);
}

std::vector<std::uint64_t> bin_counts(const ExposureMap& map, const ExposureBins& bins) {
    bins.validate();
    std::vector<std::uint64_t> counts(bins.bin_count, 0);
    for (double v : map.values) {
        ++counts[bin_index(v, bins)];
    }
    return counts;
}

std::vector<double> average_bin_counts(const std::vector<std::uint64_t>& total_counts,
                                       std::size_t image_count) {
    if (image_count == 0) throw format_error("exposure histogram: no images");
    std::vector<double> averages(total_counts.size());
    for (std::size_t i = 0; i < total_counts.size(); ++i) {
        averages[i] = static_cast<double>(total_counts[i]) / static_cast<double>(image_count);
    }
    return averages;
}

std::vector<double> exposure_histogram(const std::vector<RgbImage>& images,
                                       const ExposureBins& bins) {
    if (images.empty()) throw format_error("exposure histogram: no images");
    bins.validate();
    const int w = images.front().width;
    const int h = images.front().height;
    std::vector<std::uint64_t> totals(bins.bin_count, 0);
    for (const RgbImage& image : images) {
        if (image.width != w || image.height != h) {
            throw format_error("exposure histogram: mixed image dimensions");
        }
        const auto counts = bin_counts(exposure_map(image), bins);
        for (int g = 0; g < bins.bin_count; ++g) totals[g] += counts[g];
    }
    return average_bin_counts(totals, images.size());
}

}  // namespace xeval
