#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "versecraft/error.hpp"

namespace versecraft {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw FormatError("cannot format number");
    return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw FormatError("invalid number: '" + std::string(text) + "'");
    }
    return value;
}

template <class Int>
Int parse_int(std::string_view text) {
    Int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw FormatError("invalid integer: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace versecraft
