#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xeval/types.hpp"

namespace xeval {

// RGB images: any 8-bit PNG libpng can expand to RGB (palette, gray,
// alpha stripped). 16-bit input is rejected with format_error.
RgbImage decode_rgb_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image);

// Label maps: strictly single-channel 8-bit grayscale PNG; id 255 is the
// invalid marker. Any id >= class_count other than 255 is a validation
// error. Round-trip through encode/decode is the identity.
LabelMap decode_label_png(const std::vector<std::uint8_t>& bytes,
                          int class_count = kDefaultClassCount);
std::vector<std::uint8_t> encode_label_png(const LabelMap& map);

// File wrappers; throw io_error when the path cannot be read or written.
RgbImage load_rgb_png(const std::string& path);
LabelMap load_label_png(const std::string& path, int class_count = kDefaultClassCount);
void save_label_png(const std::string& path, const LabelMap& map);
void save_rgb_png(const std::string& path, const RgbImage& image);

}  // namespace xeval
