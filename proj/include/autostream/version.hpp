#pragma once

namespace autostream {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace autostream
