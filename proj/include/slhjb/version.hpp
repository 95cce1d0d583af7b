#ifndef SLHJB_VERSION_HPP
#define SLHJB_VERSION_HPP

namespace slhjb {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

}  // namespace slhjb

#endif  // SLHJB_VERSION_HPP
