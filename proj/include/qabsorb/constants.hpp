#pragma once

// CODATA 2018 exact / recommended values, SI.
namespace qabsorb::phys {

inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double k_B = 1.380649e-23;       // J/K
inline constexpr double eps0 = 8.8541878128e-12;  // F/m
inline constexpr double c = 299792458.0;          // m/s
inline constexpr double pi = 3.14159265358979323846;

} // namespace qabsorb::phys
