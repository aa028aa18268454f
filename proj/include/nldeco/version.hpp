#pragma once

namespace nldeco {
inline constexpr const char* kVersion = "0.1.0";
}
