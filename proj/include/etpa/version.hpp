#pragma once

namespace etpa {

inline constexpr const char* kToolName = "etpa-zscan";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace etpa
