#pragma once

namespace wursim {

inline constexpr const char* kToolName = "wursim";
inline constexpr const char* kVersion = "0.1.0";

} // namespace wursim
