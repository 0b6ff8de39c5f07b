#pragma once

#include <cmath>

namespace perchsim {

// SI everywhere internally (m, kg, s, N, N·m, rad). Degrees are accepted at
// API boundaries and converted on ingestion.
inline constexpr double kGravity = 9.81;    // m/s^2
inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline bool nearly_equal(double a, double b, double tol) {
    return std::fabs(a - b) <= tol;
}

inline double clamp01(double x) {
    if (x < 0.0) return 0.0;
    if (x > 1.0) return 1.0;
    return x;
}

} // namespace perchsim
