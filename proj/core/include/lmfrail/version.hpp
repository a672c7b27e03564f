#pragma once

namespace lmfrail {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lmfrail
