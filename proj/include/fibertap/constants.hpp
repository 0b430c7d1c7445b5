#pragma once

#include <numbers>

namespace fibertap::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double speed_of_light = 299'792'458.0;  // m/s
inline constexpr double boltzmann = 1.380649e-23;        // J/K

}  // namespace fibertap::constants
