#pragma once

// Scenario configuration: one JSON document, optionally layered over the
// built-in "paper" preset. The preset's key tree is also the schema, so
// unknown keys are rejected and, without a preset, every key is required.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "phonon_lab/dynamics.hpp"
#include "phonon_lab/errors.hpp"
#include "phonon_lab/optcavity.hpp"
#include "phonon_lab/resonator.hpp"

namespace phonon_lab::config {

using json = nlohmann::json;

struct DesignSettings {
  hertz optical_center = 193.4e12;
  hertz optical_span = 2e12;
  hertz pair_tolerance = 5e6;
  double min_suppression = 1000.0;
  hertz acoustic_span = 15e6;
  int max_transverse = 2;
  kelvin bath_temperature = 13.6;
  hertz brillouin_frequency = 12.607e9;
  meters transverse_offset = 0.0;
  std::optional<meters> optical_intensity_radius;  // derived from the optical cavity when unset
  std::optional<meters> acoustic_waist;            // derived from the resonator when unset
};

struct Fig2Settings {
  std::vector<watts> omit_powers;
  std::vector<watts> omia_powers;
  double averages = 100.0;
  double amplitude_noise = 0.2;
  double points_per_linewidth = 25.0;
  double span_linewidths = 16.0;
};

struct Fig3Settings {
  std::vector<watts> powers;
  double averages = 1000.0;
  double points_per_linewidth = 25.0;
  double span_linewidths = 16.0;
};

struct ScenarioConfig {
  resonator::HbarGeometry hbar_geometry;
  resonator::MassConvention mass_convention = resonator::MassConvention::half_mode_area;
  optcavity::OpticalCavityGeometry optical_geometry;
  DesignSettings design;
  dynamics::SystemParams system_params;
  Fig2Settings fig2;
  Fig3Settings fig3;
  std::uint64_t seed = 1;
  bool add_noise = true;
  std::string output_dir = "phonon-lab-out";
};

/// The parameter set of the reference experiment.
inline const json& paper_preset() {
  static const json preset = json::parse(R"({
    "hbar_geometry": {
      "length": 500e-6,
      "radius_of_curvature": 0.1,
      "sound_velocity": 6040.0,
      "mass_density": 2648.0,
      "refractive_index": 1.53,
      "optical_wavelength": 1550e-9,
      "mass_convention": "half_mode_area"
    },
    "optical_geometry": {
      "cavity_length": 12e-3,
      "mirror_radius": 15e-3,
      "mirror_reflectivities": [0.998953, 0.998953],
      "slab_thickness": 500e-6,
      "slab_refractive_index": 1.53,
      "slab_position": 3.25e-3,
      "slab_surface_field_reflectivity": 0.21,
      "wavelength": 1550e-9
    },
    "design": {
      "optical_center": 193.4e12,
      "optical_span": 2e12,
      "pair_tolerance": 5e6,
      "min_suppression": 1000.0,
      "acoustic_span": 15e6,
      "max_transverse": 2,
      "bath_temperature": 13.6,
      "brillouin_frequency": 12.607e9,
      "alignment": {
        "transverse_offset": 0.0,
        "optical_intensity_radius": null,
        "acoustic_waist": null
      }
    },
    "system_params": {
      "g0": 6.08,
      "kappa": 4.07e6,
      "gamma0": 600.0,
      "phonon_frequency": 12.607e9,
      "n_th": 22.4,
      "eta_ext": 0.42125,
      "eta_det": 1.0,
      "wavelength": 1550e-9
    },
    "fig2": {
      "omit_powers": [7e-6, 15e-6, 30e-6, 60e-6, 120e-6, 250e-6, 500e-6, 1000e-6, 1300e-6],
      "omia_powers": [2e-6, 5e-6, 8e-6, 11e-6, 14e-6, 17e-6],
      "averages": 100,
      "amplitude_noise": 0.2,
      "points_per_linewidth": 25,
      "span_linewidths": 16
    },
    "fig3": {
      "powers": [24e-6, 40e-6, 60e-6, 100e-6, 170e-6, 250e-6, 386e-6, 550e-6, 800e-6, 1050e-6, 1300e-6],
      "averages": 1000,
      "points_per_linewidth": 25,
      "span_linewidths": 16
    },
    "synth": {
      "seed": 1,
      "add_noise": true
    },
    "output_dir": "phonon-lab-out"
  })");
  return preset;
}

namespace detail {

inline std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Every key in `user` must exist in `schema`; objects are checked recursively.
inline void check_keys(const json& user, const json& schema, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = join(prefix, key);
    if (prefix.empty() && key == "defaults") continue;
    if (!schema.contains(key)) throw ConfigError(path, "unknown key");
    if (schema.at(key).is_object()) check_keys(value, schema.at(key), path);
  }
}

// Overlay `user` onto `base`, recursing into objects.
inline void overlay(json& base, const json& user) {
  for (const auto& [key, value] : user.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      overlay(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

class Reader {
 public:
  Reader(const json& root, std::string prefix) : root_(root), prefix_(std::move(prefix)) {}

  const json& at(const std::string& key) const {
    if (!root_.contains(key)) throw ConfigError(join(prefix_, key), "missing required key");
    return root_.at(key);
  }

  Reader child(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_object()) throw ConfigError(join(prefix_, key), "expected an object");
    return Reader(v, join(prefix_, key));
  }

  double number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(join(prefix_, key), "expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_null()) return std::nullopt;
    return number(key);
  }

  int integer(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(join(prefix_, key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_unsigned()) throw ConfigError(join(prefix_, key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(join(prefix_, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(join(prefix_, key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(join(prefix_, key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(join(prefix_, key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

 private:
  const json& root_;
  std::string prefix_;
};

inline void check_powers(const std::vector<double>& powers, const std::string& key) {
  for (double p : powers) {
    if (!(p >= 0.0)) throw ConfigError(key, "powers must be >= 0");
  }
}

}  // namespace detail

/// Fully resolved document: preset (if requested) with the user's keys on top.
inline json resolve(const json& user) {
  if (!user.is_object()) throw ConfigError("<root>", "expected a JSON object");
  detail::check_keys(user, paper_preset(), "");
  json merged;
  if (user.contains("defaults")) {
    const auto& d = user.at("defaults");
    if (!d.is_string() || d.get<std::string>() != "paper") {
      throw ConfigError("defaults", "only the \"paper\" preset is available");
    }
    merged = paper_preset();
  } else {
    merged = json::object();
  }
  json rest = user;
  rest.erase("defaults");
  detail::overlay(merged, rest);
  return merged;
}

/// Builds the typed scenario from a resolved document and validates every
/// nested physical type. Physics invariants raise PhysicsError.
inline ScenarioConfig from_json(const json& resolved) {
  using detail::Reader;
  const Reader root(resolved, "");
  ScenarioConfig c;

  const auto hb = root.child("hbar_geometry");
  c.hbar_geometry.length = hb.number("length");
  c.hbar_geometry.radius_of_curvature = hb.number("radius_of_curvature");
  c.hbar_geometry.sound_velocity = hb.number("sound_velocity");
  c.hbar_geometry.mass_density = hb.number("mass_density");
  c.hbar_geometry.refractive_index = hb.number("refractive_index");
  c.hbar_geometry.optical_wavelength = hb.number("optical_wavelength");
  const auto convention = hb.string("mass_convention");
  if (convention == "half_mode_area") {
    c.mass_convention = resonator::MassConvention::half_mode_area;
  } else if (convention == "full_mode_area") {
    c.mass_convention = resonator::MassConvention::full_mode_area;
  } else {
    throw ConfigError("hbar_geometry.mass_convention", "expected half_mode_area or full_mode_area");
  }

  const auto og = root.child("optical_geometry");
  c.optical_geometry.cavity_length = og.number("cavity_length");
  c.optical_geometry.mirror_radius = og.number("mirror_radius");
  const auto refl = og.numbers("mirror_reflectivities");
  if (refl.size() != 2) throw ConfigError("optical_geometry.mirror_reflectivities", "expected two values");
  c.optical_geometry.mirror_intensity_reflectivities = {refl[0], refl[1]};
  c.optical_geometry.slab_thickness = og.number("slab_thickness");
  c.optical_geometry.slab_refractive_index = og.number("slab_refractive_index");
  c.optical_geometry.slab_position = og.number("slab_position");
  c.optical_geometry.slab_surface_field_reflectivity = og.number("slab_surface_field_reflectivity");
  c.optical_geometry.wavelength = og.number("wavelength");

  const auto ds = root.child("design");
  c.design.optical_center = ds.number("optical_center");
  c.design.optical_span = ds.number("optical_span");
  c.design.pair_tolerance = ds.number("pair_tolerance");
  c.design.min_suppression = ds.number("min_suppression");
  c.design.acoustic_span = ds.number("acoustic_span");
  c.design.max_transverse = ds.integer("max_transverse");
  c.design.bath_temperature = ds.number("bath_temperature");
  c.design.brillouin_frequency = ds.number("brillouin_frequency");
  const auto al = ds.child("alignment");
  c.design.transverse_offset = al.number("transverse_offset");
  c.design.optical_intensity_radius = al.optional_number("optical_intensity_radius");
  c.design.acoustic_waist = al.optional_number("acoustic_waist");

  const auto sp = root.child("system_params");
  c.system_params.g0 = sp.number("g0");
  c.system_params.kappa = sp.number("kappa");
  c.system_params.gamma0 = sp.number("gamma0");
  c.system_params.phonon_frequency = sp.number("phonon_frequency");
  c.system_params.n_th = sp.number("n_th");
  c.system_params.eta_ext = sp.number("eta_ext");
  c.system_params.eta_det = sp.number("eta_det");
  c.system_params.wavelength = sp.number("wavelength");

  const auto f2 = root.child("fig2");
  c.fig2.omit_powers = f2.numbers("omit_powers");
  c.fig2.omia_powers = f2.numbers("omia_powers");
  c.fig2.averages = f2.number("averages");
  c.fig2.amplitude_noise = f2.number("amplitude_noise");
  c.fig2.points_per_linewidth = f2.number("points_per_linewidth");
  c.fig2.span_linewidths = f2.number("span_linewidths");
  detail::check_powers(c.fig2.omit_powers, "fig2.omit_powers");
  detail::check_powers(c.fig2.omia_powers, "fig2.omia_powers");

  const auto f3 = root.child("fig3");
  c.fig3.powers = f3.numbers("powers");
  c.fig3.averages = f3.number("averages");
  c.fig3.points_per_linewidth = f3.number("points_per_linewidth");
  c.fig3.span_linewidths = f3.number("span_linewidths");
  detail::check_powers(c.fig3.powers, "fig3.powers");

  const auto sy = root.child("synth");
  c.seed = sy.unsigned_integer("seed");
  c.add_noise = sy.boolean("add_noise");
  c.output_dir = root.string("output_dir");

  if (!(c.fig2.averages >= 1.0)) throw ConfigError("fig2.averages", "averages must be >= 1");
  if (!(c.fig3.averages >= 1.0)) throw ConfigError("fig3.averages", "averages must be >= 1");
  if (!(c.fig2.amplitude_noise >= 0.0)) throw ConfigError("fig2.amplitude_noise", "must be >= 0");
  if (c.design.max_transverse < 0) throw ConfigError("design.max_transverse", "must be >= 0");

  resonator::validate(c.hbar_geometry);
  optcavity::validate(c.optical_geometry);
  dynamics::validate(c.system_params);
  return c;
}

/// Parses JSON text; syntax errors are reported with their line.
inline json parse_text(const std::string& text, const std::string& source = "<config>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const auto end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < end; ++i) line += text[i] == '\n' ? 1 : 0;
    throw ConfigError(source + ":" + std::to_string(line), e.what());
  }
}

inline ScenarioConfig load_text(const std::string& text, const std::string& source = "<config>") {
  return from_json(resolve(parse_text(text, source)));
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_text(text.str(), path);
}

inline ScenarioConfig load_file(const std::string& path) { return from_json(resolve(read_file(path))); }

/// Scenario built from the "paper" preset alone.
inline ScenarioConfig paper() { return from_json(paper_preset()); }

/// Sets a dotted path (e.g. "design.alignment.transverse_offset") in a
/// resolved document. The path must already exist.
inline void set_path(json& doc, const std::string& dotted, double value) {
  json* node = &doc;
  std::string path;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    path = detail::join(path, key);
    if (!node->is_object() || !node->contains(key)) throw ConfigError(path, "unknown key");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object() || node->is_array() || node->is_string() || node->is_boolean()) {
    throw ConfigError(dotted, "sweep targets must be numeric keys");
  }
  if (node->is_number_integer()) {
    *node = static_cast<std::int64_t>(std::llround(value));
  } else {
    *node = value;
  }
}

}  // namespace phonon_lab::config
