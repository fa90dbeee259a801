#pragma once

#include <cstdio>
#include <string>

namespace dmrf::detail {

// Shortest decimal form that round-trips a binary64 exactly.
inline std::string fmt_double(double v) {
    if (v == static_cast<long long>(v) && v > -1e15 && v < 1e15) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back;
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof probe, "%.*g", prec, v);
        if (std::sscanf(probe, "%lf", &back) == 1 && back == v) {
            return probe;
        }
    }
    return buf;
}

}  // namespace dmrf::detail
