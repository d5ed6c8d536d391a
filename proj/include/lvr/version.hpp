#pragma once

namespace lvr {

inline constexpr const char* kEngineVersion = "0.1.0";

} // namespace lvr
