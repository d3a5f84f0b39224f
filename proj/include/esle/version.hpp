#pragma once

namespace esle {

inline constexpr const char* kVersion = "0.1.0";

} // namespace esle
