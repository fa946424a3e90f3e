#pragma once

namespace plrd {

inline constexpr const char* kVersion = "0.1.0";

} // namespace plrd
