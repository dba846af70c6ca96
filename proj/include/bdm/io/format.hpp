#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

#include "bdm/error.hpp"

namespace bdm::io {

/// Six significant digits; scientific notation for 0 < |x| < 1e-3 with the
/// mantissa's trailing zeros removed ("6.916e-04").
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    if (x != 0.0 && std::abs(x) < 1e-3) {
        std::snprintf(buf.data(), buf.size(), "%.5e", x);
        std::string s(buf.data());
        const auto e = s.find('e');
        auto mantissa = s.substr(0, e);
        while (!mantissa.empty() && mantissa.back() == '0') mantissa.pop_back();
        if (!mantissa.empty() && mantissa.back() == '.') mantissa.pop_back();
        return mantissa + s.substr(e);
    }
    std::snprintf(buf.data(), buf.size(), "%.6g", x);
    return buf.data();
}

/// Shortest text that parses back to exactly `x`.
inline std::string format_exact(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s, const std::string& what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) throw DataError("missing value for " + what);
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError("invalid number '" + std::string(s) + "' for " + what);
    }
    return v;
}

inline long long parse_integer(std::string_view s, const std::string& what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) throw DataError("missing value for " + what);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError("invalid integer '" + std::string(s) + "' for " + what);
    }
    return v;
}

}  // namespace bdm::io
