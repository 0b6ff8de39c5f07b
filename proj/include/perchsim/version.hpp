#pragma once

namespace perchsim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace perchsim
