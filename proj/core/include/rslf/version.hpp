#pragma once

namespace rslf {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace rslf
