#pragma once

namespace sawpull {

// Bump on any change that can alter table contents; the cache key includes it.
inline constexpr const char* kGeneratorVersion = "sawpull/0.1.0";

inline constexpr int kSchemaVersion = 1;

}  // namespace sawpull
