#pragma once

namespace flowfuse {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace flowfuse
