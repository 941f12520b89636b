#pragma once

namespace qksim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qksim
