#pragma once

namespace mmg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mmg
