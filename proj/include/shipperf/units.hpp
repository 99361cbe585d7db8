#ifndef SHIPPERF_UNITS_HPP
#define SHIPPERF_UNITS_HPP

#include <cmath>
#include <numbers>

namespace shipperf {

inline constexpr double kGravity = 9.81;              // m/s^2
inline constexpr double kDefaultWaterDensity = 1025.0; // kg/m^3, seawater
inline constexpr double kDefaultAirDensity = 1.225;    // kg/m^3
inline constexpr double kMetersPerSecondPerKnot = 1852.0 / 3600.0;

inline constexpr double knots_to_mps(double kn) { return kn * kMetersPerSecondPerKnot; }
inline constexpr double mps_to_knots(double ms) { return ms / kMetersPerSecondPerKnot; }
inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle into [0, 2*pi).
inline double wrap_two_pi(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

/// Folds an angle onto [0, pi] assuming port/starboard symmetry about the bow-stern axis.
inline double fold_to_pi(double a) {
    double r = wrap_two_pi(a);
    if (r > std::numbers::pi) r = 2.0 * std::numbers::pi - r;
    return r;
}

/// Smallest absolute difference between two angles, result in [0, pi].
inline double angle_difference(double a, double b) {
    double d = wrap_two_pi(a - b);
    if (d > std::numbers::pi) d = 2.0 * std::numbers::pi - d;
    return d;
}

} // namespace shipperf

#endif
