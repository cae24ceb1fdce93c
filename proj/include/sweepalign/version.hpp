#pragma once

namespace sweepalign {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sweepalign
