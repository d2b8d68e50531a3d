#pragma once

namespace tinsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tinsim
