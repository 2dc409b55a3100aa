#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "phonon_lab/errors.hpp"
#include "phonon_lab/units.hpp"

namespace phonon_lab {

enum class TraceKind { omit, omia, spontaneous_psd };

constexpr std::string_view to_string(TraceKind k) {
  switch (k) {
    case TraceKind::omit: return "omit";
    case TraceKind::omia: return "omia";
    case TraceKind::spontaneous_psd: return "spontaneous_psd";
  }
  return "unknown";
}

struct TraceMetadata {
  std::uint64_t seed = 0;
  std::uint64_t trace_index = 0;
  double averages = 0.0;  // 0 = noiseless
  watts transmitted_power = 0.0;
  std::string params_digest;
};

/// Frequency series in linear power units, detunings in hertz.
struct SpectrumTrace {
  std::vector<hertz> detunings;
  std::vector<double> values;
  TraceKind kind = TraceKind::omit;
  TraceMetadata metadata;

  std::size_t size() const { return detunings.size(); }
};

inline void validate_grid(const std::vector<hertz>& detunings) {
  if (detunings.empty()) fail(Errc::empty_grid, "detuning grid is empty");
  for (std::size_t i = 1; i < detunings.size(); ++i) {
    require(detunings[i] > detunings[i - 1], Errc::invalid_argument, "detunings must be strictly increasing");
  }
}

inline void validate(const SpectrumTrace& t) {
  validate_grid(t.detunings);
  require(t.values.size() == t.detunings.size(), Errc::invalid_argument, "values and detunings differ in length");
  if (t.kind == TraceKind::spontaneous_psd) {
    for (double v : t.values) require(v >= 0.0, Errc::invalid_argument, "PSD values must be >= 0");
  }
}

/// Uniform grid of `points` samples spanning [center - span/2, center + span/2].
inline std::vector<hertz> uniform_grid(hertz center, hertz span, std::size_t points) {
  require(points >= 2 && span > 0.0, Errc::empty_grid, "grid needs >= 2 points and positive span");
  std::vector<hertz> grid(points);
  const double step = span / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = center - 0.5 * span + step * static_cast<double>(i);
  }
  return grid;
}

}  // namespace phonon_lab
