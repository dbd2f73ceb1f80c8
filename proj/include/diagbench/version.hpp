#pragma once

namespace diagbench {

inline constexpr const char* version = "0.1.0";

// Bumped whenever an on-disk format (registry, records, reports, cache) changes shape.
inline constexpr int schema_version = 1;

} // namespace diagbench
