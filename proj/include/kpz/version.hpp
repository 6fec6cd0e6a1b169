#pragma once

namespace kpz {
inline constexpr const char* kVersion = "0.1.0";
}
