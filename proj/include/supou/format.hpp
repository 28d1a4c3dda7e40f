#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace supou {

/// Scientific notation with 17 significant digits, so doubles survive a
/// text roundtrip bit for bit.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

}  // namespace supou
