#pragma once

// Linearized triply-resonant optomechanics: photon number, cooperativity,
// OMIT / OMIA response, spontaneous anti-Stokes spectra and cooling.
//
// Rates are hertz (not angular). The response functions are ratios of rates,
// so evaluating them in hertz or in rad/s gives the same numbers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "phonon_lab/coupling.hpp"
#include "phonon_lab/errors.hpp"
#include "phonon_lab/spectrum_trace.hpp"
#include "phonon_lab/units.hpp"

namespace phonon_lab::dynamics {

using coupling::CouplingMap;

enum class PumpMode { red, blue };

struct SystemParams {
  hertz g0 = 6.08;
  hertz kappa = 4.07e6;
  hertz gamma0 = 600.0;
  hertz phonon_frequency = 12.607e9;
  double n_th = 22.4;
  double eta_ext = 0.5;   // kappa_ext / kappa
  double eta_det = 1.0;   // detection efficiency, a pure flux scale
  meters wavelength = 1550e-9;
};

struct DriveConfig {
  PumpMode pumped_mode = PumpMode::red;
  watts transmitted_power = 0.0;
  double intracavity_photons = 0.0;
};

inline void validate(const SystemParams& p) {
  require(p.g0 > 0.0 && p.kappa > 0.0 && p.gamma0 > 0.0 && p.phonon_frequency > 0.0,
          Errc::invalid_argument, "all rates must be positive");
  require(p.n_th >= 0.0, Errc::invalid_argument, "n_th must be >= 0");
  require(p.eta_ext > 0.0 && p.eta_ext <= 1.0, Errc::invalid_argument, "eta_ext must lie in (0, 1]");
  require(p.eta_det > 0.0 && p.eta_det <= 1.0, Errc::invalid_argument, "eta_det must lie in (0, 1]");
  require(p.wavelength > 0.0, Errc::invalid_argument, "wavelength must be positive");
}

/// Intracavity photons per watt of transmitted power: 1 / (hbar omega kappa_out).
inline double photons_per_watt(const SystemParams& p) {
  const double omega = angular(constants::speed_of_light / p.wavelength);
  const double kappa_out = p.eta_ext * angular(p.kappa);
  return 1.0 / (constants::hbar * omega * kappa_out);
}

inline double intracavity_photons(watts power, const SystemParams& p) {
  require(power >= 0.0, Errc::invalid_argument, "power must be >= 0");
  return power * photons_per_watt(p);
}

inline DriveConfig make_drive(PumpMode mode, watts power, const SystemParams& p) {
  return {mode, power, intracavity_photons(power, p)};
}

/// C = 4 g0^2 n_c / (Gamma0 kappa).
inline double cooperativity(const SystemParams& p, double n_c) {
  require(n_c >= 0.0, Errc::invalid_argument, "photon number must be >= 0");
  return 4.0 * p.g0 * p.g0 * n_c / (p.gamma0 * p.kappa);
}

inline double photons_for_cooperativity(const SystemParams& p, double c) {
  return c * p.gamma0 * p.kappa / (4.0 * p.g0 * p.g0);
}

inline watts power_for_cooperativity(const SystemParams& p, double c) {
  return photons_for_cooperativity(p, c) / photons_per_watt(p);
}

/// Gamma0 (1 + C) for a red pump, Gamma0 (1 - C) for a blue pump.
inline hertz effective_linewidth(const SystemParams& p, double c, PumpMode pump) {
  require(c >= 0.0, Errc::invalid_argument, "cooperativity must be >= 0");
  if (pump == PumpMode::red) return p.gamma0 * (1.0 + c);
  if (c >= 1.0) fail(Errc::self_oscillation, "blue-detuned pump with C >= 1 self-oscillates");
  return p.gamma0 * (1.0 - c);
}

inline double steady_state_occupation(const SystemParams& p, double c) {
  require(c >= 0.0, Errc::invalid_argument, "cooperativity must be >= 0");
  return p.n_th / (1.0 + c);
}

namespace detail {

struct ModeTerm {
  double g_eff_sq;   // (g0_j sqrt(n_c))^2
  double half_gamma;
  double offset;     // f_j - Omega
};

inline std::vector<ModeTerm> mode_terms(const CouplingMap& map, const SystemParams& p, double n_c) {
  std::vector<ModeTerm> terms;
  terms.reserve(map.entries.size());
  for (const auto& e : map.entries) {
    const double gamma = e.mode.intrinsic_linewidth > 0.0 ? e.mode.intrinsic_linewidth : p.gamma0;
    terms.push_back({e.g0 * e.g0 * n_c, 0.5 * gamma, e.mode.frequency - p.phonon_frequency});
  }
  return terms;
}

}  // namespace detail

/// Probe transmission through the blue mode with the red mode pumped,
/// relative to the bare-cavity resonant transmission:
///   T = |(kappa/2) / (kappa/2 - i delta + Sigma(delta))|^2,
///   Sigma = sum_j g_j^2 / (Gamma_j/2 - i (delta - delta_j)).
inline SpectrumTrace omit_transmission(const CouplingMap& map, const SystemParams& p, double n_c,
                                       const std::vector<hertz>& probe_detunings) {
  validate_grid(probe_detunings);
  require(n_c >= 0.0, Errc::invalid_argument, "photon number must be >= 0");
  using cd = std::complex<double>;
  const auto terms = detail::mode_terms(map, p, n_c);
  const double half_kappa = 0.5 * p.kappa;

  SpectrumTrace trace;
  trace.kind = TraceKind::omit;
  trace.detunings = probe_detunings;
  trace.values.reserve(probe_detunings.size());
  for (double delta : probe_detunings) {
    cd sigma{0.0, 0.0};
    for (const auto& t : terms) sigma += t.g_eff_sq / cd(t.half_gamma, -(delta - t.offset));
    const cd response = half_kappa / (cd(half_kappa, -delta) + sigma);
    trace.values.push_back(std::norm(response));
  }
  return trace;
}

/// Largest single-mode cooperativity in the map at photon number n_c.
inline double max_cooperativity(const CouplingMap& map, const SystemParams& p, double n_c) {
  double c_max = 0.0;
  for (const auto& e : map.entries) {
    const double gamma = e.mode.intrinsic_linewidth > 0.0 ? e.mode.intrinsic_linewidth : p.gamma0;
    c_max = std::max(c_max, 4.0 * e.g0 * e.g0 * n_c / (gamma * p.kappa));
  }
  return c_max;
}

/// Probe gain through the red mode with the blue mode pumped (two-mode
/// squeezing), relative to the bare-cavity resonant transmission:
///   T = |(kappa/2) / (kappa/2 - i delta - sum_j g_j^2 / (Gamma_j/2 - i (delta + delta_j)))|^2.
inline SpectrumTrace omia_transmission(const CouplingMap& map, const SystemParams& p, double n_c,
                                       const std::vector<hertz>& probe_detunings) {
  validate_grid(probe_detunings);
  require(n_c >= 0.0, Errc::invalid_argument, "photon number must be >= 0");
  if (max_cooperativity(map, p, n_c) >= 1.0) {
    fail(Errc::self_oscillation, "blue-detuned pump with C >= 1 self-oscillates");
  }
  using cd = std::complex<double>;
  const auto terms = detail::mode_terms(map, p, n_c);
  const double half_kappa = 0.5 * p.kappa;

  SpectrumTrace trace;
  trace.kind = TraceKind::omia;
  trace.detunings = probe_detunings;
  trace.values.reserve(probe_detunings.size());
  for (double delta : probe_detunings) {
    cd sigma{0.0, 0.0};
    for (const auto& t : terms) sigma += t.g_eff_sq / cd(t.half_gamma, -(delta + t.offset));
    const cd response = half_kappa / (cd(half_kappa, -delta) - sigma);
    trace.values.push_back(std::norm(response));
  }
  return trace;
}

/// PSD in units of the shot-noise floor. The detected anti-Stokes flux
/// 2 pi Gamma0 n_th C/(1+C) eta (photons/s, Gamma0 in hertz) sets the
/// Lorentzian area, which puts the peak 4 eta n C/(1+C) above the floor.
struct PsdModel {
  double shot_background = 1.0;
  double flux_scale = constants::two_pi;  // area per (Gamma0 n_th C/(1+C) eta_ext eta_det)
};

/// Anti-Stokes photon flux (Lorentzian area) Gamma0 n_th C/(1+C) eta_ext eta_det, times the scale.
inline double spontaneous_area(const SystemParams& p, double c, const PsdModel& model = {}) {
  require(c >= 0.0, Errc::invalid_argument, "cooperativity must be >= 0");
  return model.flux_scale * p.gamma0 * p.n_th * c / (1.0 + c) * p.eta_ext * p.eta_det;
}

/// Peak brightness normalized to 1 at C = 1: 4 C / (1 + C)^2.
inline double normalized_peak_brightness(double c) { return 4.0 * c / ((1.0 + c) * (1.0 + c)); }

/// Heterodyne PSD of the spontaneous anti-Stokes line: shot background plus a
/// Lorentzian of FWHM Gamma0 (1 + C) carrying spontaneous_area().
inline SpectrumTrace spontaneous_psd(const SystemParams& p, double c, const std::vector<hertz>& rf_detunings,
                                     const PsdModel& model = {}) {
  validate_grid(rf_detunings);
  const double width = effective_linewidth(p, c, PumpMode::red);
  const double area = spontaneous_area(p, c, model);
  const double height = 2.0 * area / (constants::pi * width);
  const double hw2 = 0.25 * width * width;

  SpectrumTrace trace;
  trace.kind = TraceKind::spontaneous_psd;
  trace.detunings = rf_detunings;
  trace.values.reserve(rf_detunings.size());
  for (double delta : rf_detunings) {
    trace.values.push_back(model.shot_background + height * hw2 / (delta * delta + hw2));
  }
  return trace;
}

/// Occupation added by an optical bath of occupation n_bath coupled at the
/// optical damping rate Gamma0 C. The detailed-balance occupation
/// (Gamma0 n_th + Gamma0 C n_bath) / (Gamma0 (1 + C)) minus the noise-free
/// n_th / (1 + C) leaves n_bath C / (1 + C), evaluated directly to avoid the
/// cancellation against n_th.
inline double noise_heating(const SystemParams& p, double c, double n_bath_optical) {
  validate(p);
  require(c >= 0.0 && n_bath_optical >= 0.0, Errc::invalid_argument, "inputs must be >= 0");
  return n_bath_optical * c / (1.0 + c);
}

/// Approximate optical bath occupation from laser phase noise S_phi (rad^2/Hz)
/// at the phonon offset, after filtering: n_c S_phi kappa_angular / 4.
inline double optical_bath_occupation(double n_c, double phase_noise_psd, hertz kappa) {
  require(n_c >= 0.0 && phase_noise_psd >= 0.0 && kappa > 0.0, Errc::invalid_argument,
          "inputs must be non-negative");
  return n_c * phase_noise_psd * angular(kappa) / 4.0;
}

}  // namespace phonon_lab::dynamics
