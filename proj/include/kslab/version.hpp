#pragma once

namespace kslab {

inline constexpr const char* version = "1.0.0";

} // namespace kslab
