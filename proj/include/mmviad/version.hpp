#pragma once

namespace mmviad {

inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace mmviad
