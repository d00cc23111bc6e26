#ifndef SWITCHLAG_VERSION_HPP
#define SWITCHLAG_VERSION_HPP

namespace switchlag {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // SWITCHLAG_VERSION_HPP
