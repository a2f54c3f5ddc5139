#pragma once

namespace procshade {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace procshade
