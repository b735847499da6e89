#pragma once

namespace cavreg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cavreg
