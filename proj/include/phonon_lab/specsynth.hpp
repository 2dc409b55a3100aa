#pragma once

// Synthetic measurement traces: ideal dynamics output plus seeded,
// schedule-independent measurement noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "phonon_lab/coupling.hpp"
#include "phonon_lab/dynamics.hpp"
#include "phonon_lab/parallel.hpp"
#include "phonon_lab/spectrum_trace.hpp"

namespace phonon_lab::specsynth {

using dynamics::SystemParams;

/// Counter-based normal deviates: every (seed, trace, bin) key maps to one
/// value, independent of generation order or thread count.
class KeyedNormal {
 public:
  explicit KeyedNormal(std::uint64_t seed) : seed_(seed) {}

  double operator()(std::uint64_t trace, std::uint64_t bin) const {
    const std::uint64_t base = mix(seed_ ^ mix(trace + 0x632be59bd9b4e019ULL) ^ mix(bin * 0x9e3779b97f4a7c15ULL));
    const double u1 = to_unit(mix(base ^ 0x1ULL));
    const double u2 = to_unit(mix(base ^ 0x2ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(constants::two_pi * u2);
  }

  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  // (0, 1], never zero so the logarithm stays finite.
  static double to_unit(std::uint64_t x) { return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53; }

  std::uint64_t seed_;
};

struct NoiseModel {
  double averages = 100.0;
  double amplitude_noise = 0.01;  // OMIT/OMIA additive noise per bin, relative to bare peak, at one average
};

/// Radiometer noise for PSD traces (multiplicative, relative deviation
/// 1/sqrt(averages), clamped at zero); additive amplitude noise of
/// amplitude_noise/sqrt(averages) for OMIT/OMIA traces. The trace index in
/// the metadata keys the random stream.
inline SpectrumTrace add_measurement_noise(SpectrumTrace trace, std::uint64_t seed, double averages,
                                           double amplitude_noise = NoiseModel{}.amplitude_noise) {
  require(averages >= 1.0, Errc::invalid_argument, "averages must be >= 1");
  const KeyedNormal normal(seed);
  const double scale = 1.0 / std::sqrt(averages);
  const auto trace_key = trace.metadata.trace_index;
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    const double z = normal(trace_key, i);
    if (trace.kind == TraceKind::spontaneous_psd) {
      trace.values[i] = std::max(0.0, trace.values[i] * (1.0 + scale * z));
    } else {
      trace.values[i] += amplitude_noise * scale * z;
    }
  }
  trace.metadata.seed = seed;
  trace.metadata.averages = averages;
  return trace;
}

struct SynthSettings {
  NoiseModel noise;
  bool add_noise = true;
  double points_per_linewidth = 25.0;
  double span_linewidths = 16.0;
  dynamics::PsdModel psd;
  int jobs = 1;
};

/// FNV-1a digest of the parameter set, hex encoded.
inline std::string params_digest(const SystemParams& p) {
  std::ostringstream text;
  text.precision(17);
  text << p.g0 << ',' << p.kappa << ',' << p.gamma0 << ',' << p.phonon_frequency << ',' << p.n_th << ','
       << p.eta_ext << ',' << p.eta_det << ',' << p.wavelength;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Detuning grid centered on the feature: span_linewidths * width wide,
/// points_per_linewidth samples per width, odd point count so 0 is sampled.
inline std::vector<hertz> feature_grid(hertz width, const SynthSettings& s) {
  require(width > 0.0, Errc::invalid_argument, "feature width must be positive");
  auto intervals = static_cast<std::size_t>(std::ceil(s.span_linewidths * s.points_per_linewidth));
  if (intervals % 2 == 1) ++intervals;
  return uniform_grid(0.0, s.span_linewidths * width, intervals + 1);
}

/// Ideal single-mode trace for one power (no noise).
inline SpectrumTrace ideal_trace(const SystemParams& p, watts power, TraceKind kind, const SynthSettings& s) {
  const double n_c = dynamics::intracavity_photons(power, p);
  const double c = dynamics::cooperativity(p, n_c);
  const auto pump = kind == TraceKind::omia ? dynamics::PumpMode::blue : dynamics::PumpMode::red;
  const double width = dynamics::effective_linewidth(p, c, pump);
  const auto grid = feature_grid(width, s);
  const auto map = coupling::single_mode_map(p.phonon_frequency, p.gamma0, p.g0);
  switch (kind) {
    case TraceKind::omit: return dynamics::omit_transmission(map, p, n_c, grid);
    case TraceKind::omia: return dynamics::omia_transmission(map, p, n_c, grid);
    case TraceKind::spontaneous_psd: return dynamics::spontaneous_psd(p, c, grid, s.psd);
  }
  fail(Errc::invalid_argument, "unknown trace kind");
}

/// One trace per power, generated in parallel; output order follows `powers`.
inline std::vector<SpectrumTrace> scenario_traces(const SystemParams& p, const std::vector<watts>& powers,
                                                  TraceKind kind, std::uint64_t seed,
                                                  const SynthSettings& s = {}) {
  dynamics::validate(p);
  require(!powers.empty(), Errc::empty_input, "no powers supplied");
  const std::string digest = params_digest(p);

  std::vector<SpectrumTrace> traces(powers.size());
  parallel_for(powers.size(), s.jobs, [&](std::size_t i) {
    auto trace = ideal_trace(p, powers[i], kind, s);
    trace.metadata.trace_index = i;
    trace.metadata.transmitted_power = powers[i];
    trace.metadata.params_digest = digest;
    trace.metadata.seed = seed;
    if (s.add_noise) trace = add_measurement_noise(std::move(trace), seed, s.noise.averages, s.noise.amplitude_noise);
    traces[i] = std::move(trace);
  });
  return traces;
}

}  // namespace phonon_lab::specsynth
