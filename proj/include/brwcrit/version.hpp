#pragma once

namespace brwcrit {
inline constexpr const char* kVersion = "0.1.0";
}
