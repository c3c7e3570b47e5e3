#pragma once

namespace polygate {

inline constexpr const char* kToolName = "polygate";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace polygate
