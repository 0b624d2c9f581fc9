#pragma once

#include <string>

namespace bml {

/// First line of every file the toolkit writes or reads.
inline constexpr const char* kVersionLine = "basin-metric-lab v1";

/// Locale-independent shortest-round-trip-safe text for a double ("inf", "nan" spelled out).
std::string format_real(double value, int significant = 17);

}  // namespace bml
