#pragma once

namespace sepvote {

inline constexpr const char* kVersion = "0.1.0";

} // namespace sepvote
