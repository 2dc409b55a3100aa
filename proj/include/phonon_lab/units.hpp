#pragma once

#include <numbers>

namespace phonon_lab {

// Frequencies are carried in ordinary hertz everywhere; 2*pi factors are
// applied explicitly where a formula needs angular rates.
using hertz = double;
using meters = double;
using seconds = double;
using watts = double;
using kelvin = double;

namespace constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact SI values.
inline constexpr double speed_of_light = 299'792'458.0;        // m/s
inline constexpr double planck = 6.626'070'15e-34;             // J s
inline constexpr double hbar = planck / two_pi;                // J s
inline constexpr double boltzmann = 1.380'649e-23;             // J/K

}  // namespace constants

inline constexpr double angular(hertz f) { return constants::two_pi * f; }

}  // namespace phonon_lab
