#pragma once

// Per-mode single-photon coupling from longitudinal phase matching and
// transverse overlap of the optical drive with the acoustic mode family.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "phonon_lab/errors.hpp"
#include "phonon_lab/resonator.hpp"
#include "phonon_lab/units.hpp"

namespace phonon_lab::coupling {

using resonator::AcousticMode;
using resonator::HbarGeometry;

struct AlignmentState {
  meters transverse_offset = 0.0;
  meters optical_intensity_radius = 0.0;
  meters acoustic_waist = 0.0;
};

struct CouplingEntry {
  AcousticMode mode;
  hertz g0 = 0.0;
};

struct CouplingMap {
  std::vector<CouplingEntry> entries;
  hertz reference_g0 = 0.0;
  hertz brillouin_frequency = 0.0;
};

/// Brillouin frequency 2 n v / lambda. Used as an estimator; scenarios carry
/// their own value.
inline hertz brillouin_frequency(const HbarGeometry& g) {
  require(g.optical_wavelength > 0.0, Errc::invalid_argument, "wavelength must be positive");
  return 2.0 * g.refractive_index * g.sound_velocity / g.optical_wavelength;
}

inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

/// |sinc(dq L / 2)| with dq = 2 pi (f - f_B) / v.
inline double phase_match_envelope(hertz mode_frequency, hertz brillouin, const HbarGeometry& g) {
  require(mode_frequency > 0.0 && brillouin > 0.0, Errc::invalid_argument, "frequencies must be positive");
  const double dq = constants::two_pi * (mode_frequency - brillouin) / g.sound_velocity;
  return std::abs(sinc(0.5 * dq * g.length));
}

/// Poisson weight exp(-xi) xi^m / m!, the equal-radius overlap with xi = d^2 / (2 w^2).
inline double poisson_weight(double xi, int m) {
  if (xi == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(-xi + m * std::log(xi) - std::lgamma(m + 1.0));
}

/// Squared normalized overlap between the displaced optical intensity
/// envelope and the order-m acoustic Hermite-Gaussian.
///
/// Both profiles are taken as exp(-x^2 / (2 w^2)) in their radius w, the
/// form under which a displacement d yields the Poisson weights with
/// xi = d^2 / (2 w^2). For unequal radii the Gaussian-Hermite integral is
/// evaluated in closed form through the Hermite generating function:
///   c_m ~ sqrt(pi/p) exp(K) sum_k m! / (k! (m-2k)!) (-mu)^k beta^(m-2k).
/// The sum over m of the result is 1 for equal radii and less otherwise.
inline double transverse_overlap(const AlignmentState& a, int order) {
  require(order >= 0, Errc::invalid_argument, "transverse order must be >= 0");
  require(a.optical_intensity_radius > 0.0 && a.acoustic_waist > 0.0, Errc::invalid_argument,
          "radii must be positive");
  require(a.transverse_offset >= 0.0, Errc::invalid_argument, "offset must be >= 0");

  const double wo = a.optical_intensity_radius;
  const double wa = a.acoustic_waist;
  const double d = a.transverse_offset;
  if (wo == wa) return poisson_weight(d * d / (2.0 * wo * wo), order);

  // Work in units of the acoustic radius.
  const double ao = wo / wa;
  const double dd = d / wa;
  const double p = 0.5 / (ao * ao) + 0.5;
  const double mu = 1.0 - 1.0 / p;
  const double beta = dd / (ao * ao * p);
  const double k_exp = dd * dd / (4.0 * p * ao * ao * ao * ao) - dd * dd / (2.0 * ao * ao);

  double poly = 0.0;
  for (int k = 0; 2 * k <= order; ++k) {
    const int j = order - 2 * k;
    const double log_coeff = std::lgamma(order + 1.0) - std::lgamma(k + 1.0) - std::lgamma(j + 1.0);
    const double term = std::exp(log_coeff) * std::pow(-mu, k) * (j == 0 ? 1.0 : std::pow(beta, j));
    poly += term;
  }
  // Normalization of the optical Gaussian and the Hermite-Gaussian.
  const double log_norm = -0.25 * std::log(constants::pi * ao * ao) -
                          0.5 * (order * std::log(2.0) + std::lgamma(order + 1.0) + 0.5 * std::log(constants::pi)) +
                          0.5 * std::log(constants::pi / p) + k_exp;
  const double c = std::exp(log_norm) * poly;
  return c * c;
}

inline CouplingMap coupling_map(const std::vector<AcousticMode>& modes, const AlignmentState& alignment,
                                hertz reference_g0, hertz brillouin, const HbarGeometry& geom) {
  require(!modes.empty(), Errc::empty_input, "no acoustic modes supplied");
  require(reference_g0 > 0.0, Errc::invalid_argument, "reference g0 must be positive");
  CouplingMap map;
  map.reference_g0 = reference_g0;
  map.brillouin_frequency = brillouin;
  map.entries.reserve(modes.size());
  for (const auto& mode : modes) {
    const double envelope = phase_match_envelope(mode.frequency, brillouin, geom);
    const double overlap = transverse_overlap(alignment, mode.transverse_order);
    map.entries.push_back({mode, reference_g0 * envelope * std::sqrt(overlap)});
  }
  std::stable_sort(map.entries.begin(), map.entries.end(),
                   [](const CouplingEntry& a, const CouplingEntry& b) {
                     return a.mode.frequency < b.mode.frequency;
                   });
  return map;
}

/// One-entry map for the dual-resonant target mode.
inline CouplingMap single_mode_map(hertz phonon_frequency, hertz gamma0, hertz g0) {
  AcousticMode mode;
  mode.frequency = phonon_frequency;
  mode.intrinsic_linewidth = gamma0;
  mode.q_factor = phonon_frequency / gamma0;
  CouplingMap map;
  map.entries.push_back({mode, g0});
  map.reference_g0 = g0;
  map.brillouin_frequency = phonon_frequency;
  return map;
}

/// Ratio g0(L0)^2 / g0(L1)^2 in dB for the family whose fundamental is
/// closest to `family_center`. Infinite when L1 is uncoupled.
inline double l1_suppression_db(const CouplingMap& map, hertz family_center) {
  const CouplingEntry* l0 = nullptr;
  for (const auto& e : map.entries) {
    if (e.mode.transverse_order != 0) continue;
    if (!l0 || std::abs(e.mode.frequency - family_center) < std::abs(l0->mode.frequency - family_center)) l0 = &e;
  }
  require(l0 != nullptr, Errc::empty_input, "map has no fundamental mode");
  const CouplingEntry* l1 = nullptr;
  for (const auto& e : map.entries) {
    if (e.mode.transverse_order == 1 && e.mode.family_index == l0->mode.family_index) l1 = &e;
  }
  require(l1 != nullptr, Errc::empty_input, "map has no first-order transverse mode in the family");
  if (l1->g0 == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10((l0->g0 * l0->g0) / (l1->g0 * l1->g0));
}

}  // namespace phonon_lab::coupling
