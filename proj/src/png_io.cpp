#include "xeval/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>

#include "xeval/error.hpp"
#include "xeval/io_util.hpp"

namespace xeval {

namespace {

struct ReadState {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t offset;
};

void read_callback(png_structp png, png_bytep out, png_size_t count) {
    auto* state = static_cast<ReadState*>(png_get_io_ptr(png));
    if (state->offset + count > state->size) {
        png_error(png, "unexpected end of PNG data");
    }
    std::memcpy(out, state->data + state->offset, count);
    state->offset += count;
}

void write_callback(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void flush_callback(png_structp) {}

// Decodes into `rows` (caller-sized) and reports geometry. `want_rgb`
// selects the transform set: everything-to-RGB8, or strict gray8.
struct Decoded {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bytes;
};

Decoded decode_png(const std::vector<std::uint8_t>& bytes, bool want_rgb) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw format_error("PNG: bad signature");
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw format_error("PNG: failed to allocate reader");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw format_error("PNG: failed to allocate info");
    }

    Decoded out;
    std::vector<png_bytep> row_pointers;
    ReadState state{bytes.data(), bytes.size(), 0};

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("PNG: corrupt or truncated stream");
    }

    png_set_read_fn(png, &state, read_callback);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (width == 0 || height == 0 || width > 1u << 20 || height > 1u << 20) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("PNG: unreasonable dimensions");
    }

    if (want_rgb) {
        if (bit_depth == 16) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw format_error("PNG: 16-bit input not supported, expected 8-bit RGB");
        }
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
            png_set_expand_gray_1_2_4_to_8(png);
        }
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
            png_set_gray_to_rgb(png);
        }
        png_set_strip_alpha(png);
    } else {
        if (bit_depth != 8 || color_type != PNG_COLOR_TYPE_GRAY) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw format_error("label PNG: expected single-channel 8-bit grayscale");
        }
    }
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t channels = want_rgb ? 3 : 1;
    if (png_get_rowbytes(png, info) != width * channels) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw format_error("PNG: unexpected row layout after transforms");
    }

    out.width = static_cast<int>(width);
    out.height = static_cast<int>(height);
    out.bytes.resize(static_cast<std::size_t>(width) * height * channels);
    row_pointers.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
        row_pointers[y] = out.bytes.data() + static_cast<std::size_t>(y) * width * channels;
    }
    png_read_image(png, row_pointers.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

std::vector<std::uint8_t> encode_png(const std::uint8_t* data, int width, int height,
                                     bool rgb) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw format_error("PNG: failed to allocate writer");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw format_error("PNG: failed to allocate info");
    }

    std::vector<std::uint8_t> out;
    std::vector<png_bytep> row_pointers(height);
    const std::size_t channels = rgb ? 3 : 1;
    for (int y = 0; y < height; ++y) {
        row_pointers[y] = const_cast<png_bytep>(data) +
                          static_cast<std::size_t>(y) * width * channels;
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw format_error("PNG: encode failed");
    }

    png_set_write_fn(png, &out, write_callback, flush_callback);
    png_set_IHDR(png, info, width, height, 8,
                 rgb ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, row_pointers.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

RgbImage decode_rgb_png(const std::vector<std::uint8_t>& bytes) {
    Decoded d = decode_png(bytes, /*want_rgb=*/true);
    RgbImage image;
    image.width = d.width;
    image.height = d.height;
    image.pixels = std::move(d.bytes);
    return image;
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image) {
    if (!image.valid()) throw format_error("encode_rgb_png: invalid image");
    return encode_png(image.pixels.data(), image.width, image.height, /*rgb=*/true);
}

LabelMap decode_label_png(const std::vector<std::uint8_t>& bytes, int class_count) {
    Decoded d = decode_png(bytes, /*want_rgb=*/false);
    LabelMap map;
    map.width = d.width;
    map.height = d.height;
    map.class_count = class_count;
    map.labels = std::move(d.bytes);
    validate_label_map(map, "label PNG");
    return map;
}

std::vector<std::uint8_t> encode_label_png(const LabelMap& map) {
    validate_label_map(map, "encode_label_png");
    return encode_png(map.labels.data(), map.width, map.height, /*rgb=*/false);
}

RgbImage load_rgb_png(const std::string& path) {
    return decode_rgb_png(read_file_bytes(path));
}

LabelMap load_label_png(const std::string& path, int class_count) {
    try {
        return decode_label_png(read_file_bytes(path), class_count);
    } catch (const format_error& e) {
        throw format_error(path + ": " + e.what());
    }
}

void save_label_png(const std::string& path, const LabelMap& map) {
    write_file_atomic(path, encode_label_png(map));
}

void save_rgb_png(const std::string& path, const RgbImage& image) {
    write_file_atomic(path, encode_rgb_png(image));
}

}  // namespace xeval
