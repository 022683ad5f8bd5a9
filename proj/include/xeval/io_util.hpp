#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xeval {

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
std::string read_file_text(const std::string& path);

// Writes to a sibling temp file and renames into place, so a failed run
// never leaves a half-written output.
void write_file_atomic(const std::string& path, const std::string& content);
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& content);

// Sorted stems of the *.png files directly inside `dir`.
std::vector<std::string> list_png_stems(const std::string& dir);

// Shortest round-trip decimal form of a double, locale-independent.
std::string format_double(double v);

}  // namespace xeval
