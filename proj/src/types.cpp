#include "xeval/types.hpp"

#include <string>

#include "xeval/error.hpp"

namespace xeval {

const std::vector<std::string>& default_class_names() {
    static const std::vector<std::string> names = {
        "road",          "sidewalk", "building", "wall",   "fence",
        "pole",          "traffic light", "traffic sign", "vegetation",
        "terrain",       "sky",      "person",   "rider",  "car",
        "truck",         "bus",      "train",    "motorcycle", "bicycle"};
    return names;
}

bool LabelMap::valid() const {
    if (width <= 0 || height <= 0) return false;
    if (class_count <= 0 || class_count > 255) return false;
    if (labels.size() != pixel_count()) return false;
    for (std::uint8_t id : labels) {
        if (id != kInvalidLabel && id >= class_count) return false;
    }
    return true;
}

void validate_label_map(const LabelMap& map, const char* what) {
    if (map.width <= 0 || map.height <= 0) {
        throw format_error(std::string(what) + ": non-positive dimensions");
    }
    if (map.class_count <= 0 || map.class_count > 255) {
        throw format_error(std::string(what) + ": class count must be in [1,255]");
    }
    if (map.labels.size() != map.pixel_count()) {
        throw format_error(std::string(what) + ": label buffer size mismatch");
    }
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
        const std::uint8_t id = map.labels[i];
        if (id != kInvalidLabel && id >= map.class_count) {
            throw format_error(std::string(what) + ": label id " + std::to_string(id) +
                               " out of range at pixel " + std::to_string(i));
        }
    }
}

}  // namespace xeval
