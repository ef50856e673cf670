#pragma once

namespace midec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace midec
