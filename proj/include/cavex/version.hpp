// version.hpp — library version string embedded in tool output metadata.
#pragma once

namespace cavex {

inline constexpr const char* version = "0.1.0";

}  // namespace cavex
