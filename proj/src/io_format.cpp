#include "bml/io_format.hpp"

#include <cmath>
#include <cstdio>

namespace bml {

std::string format_real(double value, int significant) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", significant, value);
    return buf;
}

}  // namespace bml
