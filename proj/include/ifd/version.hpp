#pragma once

namespace ifd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ifd
