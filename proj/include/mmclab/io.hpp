#pragma once

// Deterministic text formatting for CSV/JSON artifacts. All doubles are
// printed with %.17g so that re-runs produce byte-identical files and
// values round-trip exactly.

#include <cstdio>
#include <string>

namespace mmclab {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace mmclab
