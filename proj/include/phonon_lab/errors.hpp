#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phonon_lab {

enum class Errc {
  invalid_argument,
  unstable_resonator,
  empty_span,
  no_resonance_in_span,
  no_pair_found,
  suppression_too_low,
  empty_input,
  self_oscillation,
  empty_grid,
  no_peak_found,
  no_convergence,
  insufficient_data,
  negative_slope,
  unphysical_linewidth,
};

constexpr std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::unstable_resonator: return "UnstableResonator";
    case Errc::empty_span: return "EmptySpan";
    case Errc::no_resonance_in_span: return "NoResonanceInSpan";
    case Errc::no_pair_found: return "NoPairFound";
    case Errc::suppression_too_low: return "SuppressionTooLow";
    case Errc::empty_input: return "EmptyInput";
    case Errc::self_oscillation: return "SelfOscillation";
    case Errc::empty_grid: return "EmptyGrid";
    case Errc::no_peak_found: return "NoPeakFound";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::negative_slope: return "NegativeSlope";
    case Errc::unphysical_linewidth: return "UnphysicalLinewidth";
  }
  return "Unknown";
}

/// Raised by every physics/analysis routine when a precondition or a
/// model invariant fails. The code identifies the failure class.
class PhysicsError : public std::runtime_error {
 public:
  PhysicsError(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Scenario configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("ConfigError [" + key + "]: " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Malformed command-line request (bad figure name, empty sweep grid).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw PhysicsError(code, what); }

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace phonon_lab
