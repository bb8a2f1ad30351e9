#pragma once

namespace vibronic {

inline constexpr const char* version = "0.3.0";

} // namespace vibronic
