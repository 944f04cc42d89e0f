#pragma once

namespace pdvoice {

inline constexpr const char* kToolName = "pdvoice";

#ifdef PDVOICE_VERSION
inline constexpr const char* kVersion = PDVOICE_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

}  // namespace pdvoice
