#pragma once

namespace surf4 {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace surf4
