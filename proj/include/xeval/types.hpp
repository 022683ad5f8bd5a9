#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xeval {

// Reserved label id for pixels that could not be annotated. Such pixels
// are excluded from training statistics and from every metric.
inline constexpr std::uint8_t kInvalidLabel = 255;

// Evaluable classes by default (Cityscapes-style train ids).
inline constexpr int kDefaultClassCount = 19;

const std::vector<std::string>& default_class_names();

// 8-bit RGB image, row-major, channels interleaved (R,G,B).
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
    bool valid() const {
        return width > 0 && height > 0 && pixels.size() == pixel_count() * 3;
    }
};

// Per-pixel class ids in [0, class_count) plus kInvalidLabel, row-major.
struct LabelMap {
    int width = 0;
    int height = 0;
    int class_count = kDefaultClassCount;
    std::vector<std::uint8_t> labels;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    std::uint8_t at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
    bool valid() const;
};

// Throws format_error unless the map's dimensions, class count and every
// label id satisfy the LabelMap contract.
void validate_label_map(const LabelMap& map, const char* what);

}  // namespace xeval
