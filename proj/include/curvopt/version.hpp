#pragma once

namespace curvopt {
inline constexpr const char* kVersion = "0.1.0";
}
