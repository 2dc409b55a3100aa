#pragma once

// Optical Fabry-Perot with the quartz slab inside: resonance spectrum from the
// air/slab/air stack, linewidth, Gaussian waist, and operating-pair selection.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <limits>
#include <utility>
#include <vector>

#include "phonon_lab/errors.hpp"
#include "phonon_lab/units.hpp"

namespace phonon_lab::optcavity {

struct OpticalCavityGeometry {
  meters cavity_length = 12e-3;
  meters mirror_radius = 15e-3;
  std::pair<double, double> mirror_intensity_reflectivities{0.998953, 0.998953};
  meters slab_thickness = 500e-6;
  double slab_refractive_index = 1.53;
  meters slab_position = 3.25e-3;  // flat face, measured from the input mirror
  double slab_surface_field_reflectivity = 0.21;
  meters wavelength = 1550e-9;
};

enum class ModeRole { red, blue, spectator };

struct OpticalMode {
  long index = 0;
  hertz frequency = 0.0;
  hertz linewidth = 0.0;
  ModeRole role = ModeRole::spectator;
};

struct ModePair {
  OpticalMode red;
  OpticalMode blue;
  hertz pair_spacing = 0.0;
  double stokes_suppression = 1.0;
};

struct OpticalWaist {
  meters amplitude_waist = 0.0;
  meters intensity_radius = 0.0;
};

inline void validate(const OpticalCavityGeometry& g) {
  require(g.cavity_length > 0.0, Errc::invalid_argument, "cavity length must be positive");
  require(g.slab_thickness > 0.0 && g.slab_thickness < g.cavity_length, Errc::invalid_argument,
          "slab thickness must lie in (0, cavity_length)");
  require(g.slab_position >= 0.0 && g.slab_position + g.slab_thickness <= g.cavity_length,
          Errc::invalid_argument, "slab must sit inside the cavity");
  require(g.slab_refractive_index > 0.0, Errc::invalid_argument, "slab index must be positive");
  require(g.slab_surface_field_reflectivity >= 0.0 && g.slab_surface_field_reflectivity < 1.0,
          Errc::invalid_argument, "slab surface reflectivity must lie in [0, 1)");
  const auto [r1, r2] = g.mirror_intensity_reflectivities;
  require(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0, Errc::invalid_argument,
          "mirror reflectivities must lie in (0, 1)");
  require(g.wavelength > 0.0, Errc::invalid_argument, "wavelength must be positive");
  require(g.mirror_radius > g.cavity_length, Errc::unstable_resonator,
          "plano-concave cavity requires mirror radius > cavity length");
}

inline meters optical_path_length(const OpticalCavityGeometry& g) {
  return g.cavity_length - g.slab_thickness + g.slab_refractive_index * g.slab_thickness;
}

/// FSR of the cavity with the slab reflections switched off.
inline hertz nominal_fsr(const OpticalCavityGeometry& g) {
  return constants::speed_of_light / (2.0 * optical_path_length(g));
}

inline double finesse(const OpticalCavityGeometry& g) {
  const double r = std::sqrt(g.mirror_intensity_reflectivities.first *
                             g.mirror_intensity_reflectivities.second);
  return constants::pi * std::sqrt(r) / (1.0 - r);
}

inline hertz cavity_linewidth(hertz fsr, double finesse_value) {
  require(finesse_value > 0.0, Errc::invalid_argument, "finesse must be positive");
  if (std::isinf(finesse_value)) return 0.0;
  return fsr / finesse_value;
}

inline OpticalWaist optical_waist(const OpticalCavityGeometry& g) {
  require(g.cavity_length > 0.0 && g.wavelength > 0.0, Errc::invalid_argument,
          "cavity length and wavelength must be positive");
  require(g.mirror_radius > g.cavity_length, Errc::unstable_resonator,
          "optical waist requires L < R");
  const double w2 = g.wavelength / constants::pi *
                    std::sqrt(g.cavity_length * (g.mirror_radius - g.cavity_length));
  const double w0 = std::sqrt(w2);
  return {w0, w0 / std::numbers::sqrt2};
}

namespace detail {

// Reflection looking from the input mirror into the stack, multiplied by the
// input mirror's -1. Its argument is the round-trip phase; a resonance sits at
// arg = 0. Layers are walked from the far mirror back with
// Gamma_left = (r + Gamma_right) / (1 + r Gamma_right).
inline std::complex<double> round_trip_factor(const OpticalCavityGeometry& g, hertz nu) {
  using cd = std::complex<double>;
  const double beta = constants::two_pi * nu / constants::speed_of_light;
  const double rs = g.slab_surface_field_reflectivity;
  const double gap_in = g.slab_position;
  const double gap_out = g.cavity_length - g.slab_position - g.slab_thickness;
  const double slab = g.slab_refractive_index * g.slab_thickness;

  cd gamma = -std::polar(1.0, 2.0 * beta * gap_out);
  gamma = (rs + gamma) / (1.0 + rs * gamma);
  gamma *= std::polar(1.0, 2.0 * beta * slab);
  gamma = (-rs + gamma) / (1.0 - rs * gamma);
  gamma *= std::polar(1.0, 2.0 * beta * gap_in);
  return -gamma;
}

}  // namespace detail

/// Wrapped round-trip phase in (-pi, pi]; increases through zero at each resonance.
inline double round_trip_phase(const OpticalCavityGeometry& g, hertz nu) {
  return std::arg(detail::round_trip_factor(g, nu));
}

/// Unwrapped round-trip phase in cycles. The etalon ripple stays well inside
/// half a cycle for r < 0.5, so the deviation from the slab-free linear phase
/// is recovered unambiguously with a principal argument.
inline double round_trip_cycles(const OpticalCavityGeometry& g, hertz nu) {
  const double linear = 2.0 * constants::two_pi * nu * optical_path_length(g) / constants::speed_of_light;
  const auto factor = detail::round_trip_factor(g, nu) * std::polar(1.0, -linear);
  return (linear + std::arg(factor)) / constants::two_pi;
}

struct ResonanceSearch {
  double grid_step_fraction = 0.1;     // grid step in units of the nominal linewidth
  double bisection_tolerance = 1e-6;   // final bracket width in units of the nominal linewidth
  int jobs = 1;                        // frequency windows searched concurrently
};

namespace detail {

inline std::vector<hertz> roots_in_window(const OpticalCavityGeometry& g, hertz start, double step,
                                          std::size_t first, std::size_t last, double tolerance) {
  std::vector<hertz> roots;
  double prev_nu = start + step * static_cast<double>(first);
  double prev = round_trip_phase(g, prev_nu);
  for (std::size_t i = first + 1; i <= last; ++i) {
    const double nu = start + step * static_cast<double>(i);
    const double cur = round_trip_phase(g, nu);
    // The phase only rises through zero at a resonance; the +pi -> -pi wrap
    // at an anti-resonance is the opposite sign change and is skipped.
    if (prev < 0.0 && cur >= 0.0) {
      double lo = prev_nu;
      double hi = nu;
      while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (round_trip_phase(g, mid) < 0.0) lo = mid; else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev = cur;
    prev_nu = nu;
  }
  return roots;
}

}  // namespace detail

/// Resonances of the slab-loaded cavity within [center - span/2, center + span/2].
/// Linewidths follow the local FSR (group delay) divided by the mirror finesse.
inline std::vector<OpticalMode> resonance_spectrum(const OpticalCavityGeometry& g, hertz span, hertz center,
                                                   const ResonanceSearch& search = {}) {
  validate(g);
  require(span > 0.0 && center > 0.0, Errc::invalid_argument, "span and center must be positive");
  const double fin = finesse(g);
  const double kappa = cavity_linewidth(nominal_fsr(g), fin);
  const double step = search.grid_step_fraction * kappa;
  const double tolerance = search.bisection_tolerance * kappa;
  const double start = center - 0.5 * span;
  const auto points = static_cast<std::size_t>(std::ceil(span / step));

  const std::size_t jobs = static_cast<std::size_t>(std::max(1, search.jobs));
  const std::size_t chunk = (points + jobs - 1) / jobs;
  std::vector<std::future<std::vector<hertz>>> parts;
  for (std::size_t first = 0; first < points; first += chunk) {
    const std::size_t last = std::min(points, first + chunk);
    auto task = [&g, start, step, first, last, tolerance] {
      return detail::roots_in_window(g, start, step, first, last, tolerance);
    };
    parts.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, task));
  }

  std::vector<OpticalMode> modes;
  for (auto& part : parts) {
    for (double nu : part.get()) {
      OpticalMode m;
      m.frequency = nu;
      m.index = std::lround(round_trip_cycles(g, nu));
      const double h = 1e-3 * kappa;
      const double slope = (round_trip_cycles(g, nu + h) - round_trip_cycles(g, nu - h)) / (2.0 * h);
      m.linewidth = cavity_linewidth(1.0 / slope, fin);
      modes.push_back(m);
    }
  }
  if (modes.empty()) fail(Errc::no_resonance_in_span, "no cavity resonance in the requested span");
  return modes;
}

/// 1 + (2 delta / kappa)^2 where delta is the Stokes sideband's detuning from
/// the nearest cavity mode; the anti-Stokes side is taken as resonant.
inline double stokes_suppression(const ModePair& pair, const std::vector<OpticalMode>& spectrum,
                                 hertz phonon_frequency) {
  require(!spectrum.empty(), Errc::empty_input, "spectrum is empty");
  const double stokes = pair.red.frequency - phonon_frequency;
  const OpticalMode* nearest = &spectrum.front();
  for (const auto& m : spectrum) {
    if (std::abs(m.frequency - stokes) < std::abs(nearest->frequency - stokes)) nearest = &m;
  }
  const double delta = stokes - nearest->frequency;
  const double x = 2.0 * delta / nearest->linewidth;
  return 1.0 + x * x;
}

inline ModePair find_operating_pair(std::vector<OpticalMode> spectrum, hertz target, hertz tolerance,
                                    double min_suppression) {
  require(target > 0.0, Errc::invalid_argument, "target spacing must be positive");
  require(spectrum.size() >= 2, Errc::no_pair_found, "need at least two optical modes");
  std::sort(spectrum.begin(), spectrum.end(), [](const OpticalMode& a, const OpticalMode& b) {
    return a.frequency < b.frequency;
  });

  bool any_in_tolerance = false;
  double best_error = std::numeric_limits<double>::infinity();
  double best_suppression_seen = 0.0;
  ModePair best;
  for (std::size_t i = 0; i + 1 < spectrum.size(); ++i) {
    ModePair pair;
    pair.red = spectrum[i];
    pair.blue = spectrum[i + 1];
    pair.red.role = ModeRole::red;
    pair.blue.role = ModeRole::blue;
    pair.pair_spacing = pair.blue.frequency - pair.red.frequency;
    const double error = std::abs(pair.pair_spacing - target);
    if (error > tolerance) continue;
    any_in_tolerance = true;
    // Stokes line below the scanned span: its neighborhood is unknown.
    if (pair.red.frequency - target < spectrum.front().frequency) continue;
    pair.stokes_suppression = stokes_suppression(pair, spectrum, target);
    best_suppression_seen = std::max(best_suppression_seen, pair.stokes_suppression);
    if (pair.stokes_suppression < min_suppression) continue;
    if (error < best_error) {
      best_error = error;
      best = pair;
    }
  }
  if (!any_in_tolerance) fail(Errc::no_pair_found, "no adjacent mode pair within tolerance of target");
  if (!std::isfinite(best_error)) {
    fail(Errc::suppression_too_low,
         "best Stokes suppression " + std::to_string(best_suppression_seen) + " below required " +
             std::to_string(min_suppression));
  }
  return best;
}

}  // namespace phonon_lab::optcavity
