#pragma once

namespace mcdemod {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mcdemod
