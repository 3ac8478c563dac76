#pragma once

namespace gbdt {

inline constexpr const char* kArtifactName = "dirac-gbdt";
inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace gbdt
