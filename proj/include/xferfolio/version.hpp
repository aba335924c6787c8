#pragma once

namespace xferfolio {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xferfolio
