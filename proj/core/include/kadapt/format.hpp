#pragma once

#include <charconv>
#include <string>

namespace kadapt {

/// Shortest decimal string that round-trips the double exactly. Used wherever
/// numeric output must be byte-deterministic (CSV, JSON, LP dumps).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace kadapt
