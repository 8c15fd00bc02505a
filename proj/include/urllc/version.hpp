#pragma once

namespace urllc {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace urllc
