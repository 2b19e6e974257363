#pragma once

namespace bilab {

inline constexpr const char* version = "0.1.0";

}  // namespace bilab
