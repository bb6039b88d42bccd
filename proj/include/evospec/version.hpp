#pragma once

namespace evospec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace evospec
