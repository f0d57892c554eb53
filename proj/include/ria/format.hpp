#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

#include "ria/error.hpp"

namespace ria {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double value) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, end);
}

inline std::string format_fixed(double value, int digits) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return std::string(buf, static_cast<std::size_t>(n));
}

inline double parse_double(std::string_view text, ErrorCode on_error) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        raise(on_error, "bad number '" + std::string(text) + "'");
    }
    return value;
}

inline std::int64_t parse_int(std::string_view text, ErrorCode on_error) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        raise(on_error, "bad integer '" + std::string(text) + "'");
    }
    return value;
}

inline std::uint64_t parse_uint(std::string_view text, ErrorCode on_error) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        raise(on_error, "bad integer '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace ria
