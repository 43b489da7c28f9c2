#pragma once

namespace zorb {

inline constexpr const char* kVersion = "0.1.0";

} // namespace zorb
