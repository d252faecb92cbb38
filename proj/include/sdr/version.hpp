#pragma once

namespace sdr {
inline constexpr const char* kVersion = "0.1.0";
}
