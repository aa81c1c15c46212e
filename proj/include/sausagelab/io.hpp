#pragma once

#include <cstdio>
#include <string>

namespace sausagelab {

// 17 significant digits: round-trips any double, keeps outputs hash-stable.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace sausagelab
