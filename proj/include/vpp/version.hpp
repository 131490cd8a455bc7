#pragma once

#ifndef VPP_VERSION
#define VPP_VERSION "0.1.0"
#endif

namespace vpp {

inline constexpr const char* kVersion = VPP_VERSION;

}  // namespace vpp
