#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stablevar {

inline constexpr std::string_view version = "0.1.0";

// Error hierarchy. The CLI maps these onto its exit codes:
// input_error -> 2, numeric_error -> 3, config_error -> 4.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct input_error : error {
    using error::error;
};

struct numeric_error : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

} // namespace stablevar
