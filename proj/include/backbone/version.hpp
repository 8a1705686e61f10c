#pragma once

namespace backbone {

inline constexpr const char* kToolName = "backbone";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace backbone
