#pragma once

// Acoustic mode structure of a plano-convex bulk acoustic wave resonator.

#include <algorithm>
#include <cmath>
#include <vector>

#include "phonon_lab/errors.hpp"
#include "phonon_lab/units.hpp"

namespace phonon_lab::resonator {

struct HbarGeometry {
  meters length = 500e-6;
  meters radius_of_curvature = 0.1;
  double sound_velocity = 6040.0;   // m/s, calibrated to the measured 6.04 MHz FSR
  double mass_density = 2648.0;     // kg/m^3, alpha quartz
  double refractive_index = 1.53;
  meters optical_wavelength = 1550e-9;
};

struct AcousticMode {
  int family_index = 0;     // longitudinal overtone n
  int transverse_order = 0; // 0 = fundamental (L0)
  hertz frequency = 0.0;
  hertz intrinsic_linewidth = 0.0;
  meters waist_radius = 0.0;
  double q_factor = 0.0;
  double motional_mass = 0.0;  // kg
};

enum class MassConvention {
  half_mode_area,  // rho * L * pi w0^2 / 2
  full_mode_area,  // rho * L * pi w0^2
};

/// Motional mass quoted for the device; neither Gaussian convention above
/// reproduces it from the quoted waist, so it is kept as a reference value.
inline constexpr double reference_motional_mass = 7.5e-9;  // kg

struct CoherenceMetrics {
  double fq_product = 0.0;  // Hz
  seconds coherence_time = 0.0;
};

inline void validate(const HbarGeometry& g) {
  require(g.length > 0.0, Errc::invalid_argument, "HBAR length must be positive");
  require(g.sound_velocity > 0.0, Errc::invalid_argument, "sound velocity must be positive");
  require(g.mass_density > 0.0, Errc::invalid_argument, "mass density must be positive");
  require(g.refractive_index > 0.0, Errc::invalid_argument, "refractive index must be positive");
  require(g.optical_wavelength > 0.0, Errc::invalid_argument, "optical wavelength must be positive");
  require(g.radius_of_curvature > g.length, Errc::unstable_resonator,
          "plano-convex HBAR requires radius of curvature > length");
}

inline hertz acoustic_fsr(const HbarGeometry& g) {
  require(g.length > 0.0 && g.sound_velocity > 0.0, Errc::invalid_argument,
          "acoustic_fsr needs positive length and velocity");
  return g.sound_velocity / (2.0 * g.length);
}

/// Hermite-Gaussian transverse mode spacing, (FSR/pi) * acos(sqrt(1 - L/R)).
/// An infinite radius (flat-flat) gives zero spacing.
inline hertz transverse_mode_spacing(const HbarGeometry& g) {
  require(g.length > 0.0, Errc::invalid_argument, "length must be positive");
  require(g.radius_of_curvature > g.length, Errc::unstable_resonator,
          "transverse spacing requires L < R");
  const double fsr = acoustic_fsr(g);
  if (std::isinf(g.radius_of_curvature)) return 0.0;
  return fsr / constants::pi * std::acos(std::sqrt(1.0 - g.length / g.radius_of_curvature));
}

/// Amplitude 1/e waist at the flat face: w0^2 = (Lambda/pi) sqrt(L (R - L)).
inline meters acoustic_waist(const HbarGeometry& g, hertz frequency) {
  require(frequency > 0.0, Errc::invalid_argument, "frequency must be positive");
  require(g.length > 0.0, Errc::invalid_argument, "length must be positive");
  require(g.radius_of_curvature > g.length, Errc::unstable_resonator, "acoustic waist requires L < R");
  const double wavelength = g.sound_velocity / frequency;
  const double w2 = wavelength / constants::pi *
                    std::sqrt(g.length * (g.radius_of_curvature - g.length));
  return std::sqrt(w2);
}

inline double motional_mass(const HbarGeometry& g, meters waist,
                            MassConvention convention = MassConvention::half_mode_area) {
  const double area = constants::pi * waist * waist;
  const double full = g.mass_density * g.length * area;
  return convention == MassConvention::half_mode_area ? 0.5 * full : full;
}

/// Every mode f(n, m) = n FSR + m dnu_T inside [center - span/2, center + span/2],
/// sorted by frequency.
inline std::vector<AcousticMode> mode_spectrum(const HbarGeometry& g, hertz center, hertz span,
                                               hertz gamma0, int max_transverse,
                                               MassConvention convention = MassConvention::half_mode_area) {
  validate(g);
  require(span > 0.0, Errc::invalid_argument, "span must be positive");
  require(max_transverse >= 0, Errc::invalid_argument, "max_transverse must be >= 0");
  require(gamma0 > 0.0, Errc::invalid_argument, "intrinsic linewidth must be positive");

  const double fsr = acoustic_fsr(g);
  const double spacing = transverse_mode_spacing(g);
  const double lo = center - 0.5 * span;
  const double hi = center + 0.5 * span;

  std::vector<AcousticMode> modes;
  for (int m = 0; m <= max_transverse; ++m) {
    const double offset = m * spacing;
    const auto n_lo = static_cast<long>(std::ceil((lo - offset) / fsr));
    const auto n_hi = static_cast<long>(std::floor((hi - offset) / fsr));
    for (long n = std::max(n_lo, 1L); n <= n_hi; ++n) {
      const double f = static_cast<double>(n) * fsr + offset;
      if (f < lo || f > hi || f <= 0.0) continue;
      AcousticMode mode;
      mode.family_index = static_cast<int>(n);
      mode.transverse_order = m;
      mode.frequency = f;
      mode.intrinsic_linewidth = gamma0;
      mode.q_factor = f / gamma0;
      mode.waist_radius = acoustic_waist(g, f);
      mode.motional_mass = motional_mass(g, mode.waist_radius, convention);
      modes.push_back(mode);
    }
  }
  if (modes.empty()) fail(Errc::empty_span, "no acoustic mode inside the requested window");

  std::sort(modes.begin(), modes.end(), [](const AcousticMode& a, const AcousticMode& b) {
    if (a.frequency != b.frequency) return a.frequency < b.frequency;
    return a.transverse_order < b.transverse_order;
  });
  return modes;
}

/// Bose-Einstein mean occupation; zero at T = 0.
inline double thermal_occupation(hertz frequency, kelvin temperature) {
  require(frequency > 0.0, Errc::invalid_argument, "frequency must be positive");
  require(temperature >= 0.0, Errc::invalid_argument, "temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  const double x = constants::planck * frequency / (constants::boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

/// f*Q product and energy coherence time 1/Gamma0 (angular), i.e. Q/(2 pi f).
inline CoherenceMetrics coherence_metrics(const AcousticMode& mode) {
  require(mode.frequency > 0.0 && mode.intrinsic_linewidth > 0.0, Errc::invalid_argument,
          "mode needs positive frequency and linewidth");
  return {mode.frequency * mode.q_factor, 1.0 / angular(mode.intrinsic_linewidth)};
}

}  // namespace phonon_lab::resonator
