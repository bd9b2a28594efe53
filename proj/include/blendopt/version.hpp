#pragma once

namespace blendopt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace blendopt
