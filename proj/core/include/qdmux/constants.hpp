#pragma once

#include <cmath>
#include <cstdint>

namespace qdmux {

inline constexpr double kPi = 3.14159265358979323846;

/// Planck constant in eV*s; converts a fine-structure splitting to a
/// frequency detuning via delta_nu = FSS / h.
inline constexpr double kPlanckEvS = 4.135667696e-15;

/// Timestamps are kept on a 1 ps integer grid throughout.
inline constexpr double kPsPerSecond = 1e12;

inline std::int64_t to_ps(double seconds) {
    return static_cast<std::int64_t>(std::llround(seconds * kPsPerSecond));
}

inline double to_seconds(std::int64_t ps) {
    return static_cast<double>(ps) / kPsPerSecond;
}

}  // namespace qdmux
