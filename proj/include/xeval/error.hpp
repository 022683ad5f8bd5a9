#pragma once

#include <stdexcept>

namespace xeval {

// Missing or unreadable input files.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed data: bad PNG structure, label ids out of range, manifest
// syntax errors, shape mismatches between paired inputs.
struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A requested metric is undefined on the given input, e.g. no valid
// ground-truth pixels anywhere.
struct metric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace xeval
