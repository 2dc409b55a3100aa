#pragma once

// End-to-end commands on a ScenarioConfig. Each returns an in-memory file
// set; writing to disk is left to the caller.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phonon_lab/analysis.hpp"
#include "phonon_lab/config.hpp"
#include "phonon_lab/coupling.hpp"
#include "phonon_lab/dynamics.hpp"
#include "phonon_lab/io.hpp"
#include "phonon_lab/optcavity.hpp"
#include "phonon_lab/parallel.hpp"
#include "phonon_lab/resonator.hpp"
#include "phonon_lab/specsynth.hpp"

namespace phonon_lab::pipelines {

using config::json;
using config::ScenarioConfig;

struct FileSet {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents

  void add(std::string name, std::string contents) { files.emplace_back(std::move(name), std::move(contents)); }
  const std::string* find(const std::string& name) const {
    for (const auto& [n, c] : files)
      if (n == name) return &c;
    return nullptr;
  }
};

// ---------------------------------------------------------------- design

inline coupling::AlignmentState resolve_alignment(const ScenarioConfig& c) {
  coupling::AlignmentState a;
  a.transverse_offset = c.design.transverse_offset;
  a.optical_intensity_radius = c.design.optical_intensity_radius
                                   ? *c.design.optical_intensity_radius
                                   : optcavity::optical_waist(c.optical_geometry).intensity_radius;
  a.acoustic_waist = c.design.acoustic_waist ? *c.design.acoustic_waist
                                             : resonator::acoustic_waist(c.hbar_geometry, c.system_params.phonon_frequency);
  return a;
}

inline coupling::CouplingMap design_coupling_map(const ScenarioConfig& c) {
  const auto modes = resonator::mode_spectrum(c.hbar_geometry, c.system_params.phonon_frequency, c.design.acoustic_span,
                                              c.system_params.gamma0, c.design.max_transverse, c.mass_convention);
  return coupling::coupling_map(modes, resolve_alignment(c), c.system_params.g0, c.design.brillouin_frequency,
                                c.hbar_geometry);
}

struct DesignReport {
  hertz acoustic_fsr = 0.0;
  hertz transverse_spacing = 0.0;
  meters acoustic_waist = 0.0;
  double motional_mass = 0.0;
  double thermal_occupation = 0.0;
  double fq_product = 0.0;
  seconds coherence_time = 0.0;
  hertz brillouin_estimate = 0.0;
  hertz optical_fsr = 0.0;
  double finesse = 0.0;
  hertz kappa = 0.0;
  optcavity::OpticalWaist optical_waist;
  std::vector<optcavity::OpticalMode> optical_modes;
  optcavity::ModePair pair;
  coupling::CouplingMap coupling;
  coupling::AlignmentState alignment;
  double l1_suppression_db = 0.0;
};

inline DesignReport design(const ScenarioConfig& c, int jobs = 1) {
  DesignReport r;
  const auto& hb = c.hbar_geometry;
  const auto& sp = c.system_params;
  r.acoustic_fsr = resonator::acoustic_fsr(hb);
  r.transverse_spacing = resonator::transverse_mode_spacing(hb);
  r.acoustic_waist = resonator::acoustic_waist(hb, sp.phonon_frequency);
  r.motional_mass = resonator::motional_mass(hb, r.acoustic_waist, c.mass_convention);
  r.thermal_occupation = resonator::thermal_occupation(sp.phonon_frequency, c.design.bath_temperature);
  resonator::AcousticMode target;
  target.frequency = sp.phonon_frequency;
  target.intrinsic_linewidth = sp.gamma0;
  target.q_factor = sp.phonon_frequency / sp.gamma0;
  const auto coherence = resonator::coherence_metrics(target);
  r.fq_product = coherence.fq_product;
  r.coherence_time = coherence.coherence_time;
  r.brillouin_estimate = coupling::brillouin_frequency(hb);

  const auto& og = c.optical_geometry;
  r.optical_fsr = optcavity::nominal_fsr(og);
  r.finesse = optcavity::finesse(og);
  r.kappa = optcavity::cavity_linewidth(r.optical_fsr, r.finesse);
  r.optical_waist = optcavity::optical_waist(og);
  optcavity::ResonanceSearch search;
  search.jobs = jobs;
  r.optical_modes = optcavity::resonance_spectrum(og, c.design.optical_span, c.design.optical_center, search);
  r.pair = optcavity::find_operating_pair(r.optical_modes, sp.phonon_frequency, c.design.pair_tolerance,
                                          c.design.min_suppression);

  r.alignment = resolve_alignment(c);
  r.coupling = design_coupling_map(c);
  r.l1_suppression_db = coupling::l1_suppression_db(r.coupling, sp.phonon_frequency);
  return r;
}

inline json to_json(const DesignReport& r) {
  json modes = json::array();
  for (const auto& e : r.coupling.entries) {
    modes.push_back({{"family_index", e.mode.family_index},
                     {"transverse_order", e.mode.transverse_order},
                     {"frequency_Hz", e.mode.frequency},
                     {"g0_Hz", e.g0}});
  }
  // JSON has no infinity; an uncoupled L1 is reported as null.
  const json l1 = std::isfinite(r.l1_suppression_db) ? json(r.l1_suppression_db) : json(nullptr);
  return {
      {"acoustic",
       {{"fsr_Hz", r.acoustic_fsr},
        {"transverse_spacing_Hz", r.transverse_spacing},
        {"waist_m", r.acoustic_waist},
        {"motional_mass_kg", r.motional_mass},
        {"reference_motional_mass_kg", resonator::reference_motional_mass},
        {"thermal_occupation", r.thermal_occupation},
        {"fq_product_Hz", r.fq_product},
        {"coherence_time_s", r.coherence_time},
        {"brillouin_estimate_Hz", r.brillouin_estimate}}},
      {"optical",
       {{"nominal_fsr_Hz", r.optical_fsr},
        {"finesse", r.finesse},
        {"kappa_Hz", r.kappa},
        {"amplitude_waist_m", r.optical_waist.amplitude_waist},
        {"intensity_radius_m", r.optical_waist.intensity_radius},
        {"modes_found", r.optical_modes.size()},
        {"operating_pair",
         {{"red_Hz", r.pair.red.frequency},
          {"blue_Hz", r.pair.blue.frequency},
          {"spacing_Hz", r.pair.pair_spacing},
          {"stokes_suppression", r.pair.stokes_suppression}}}}},
      {"coupling",
       {{"transverse_offset_m", r.alignment.transverse_offset},
        {"optical_intensity_radius_m", r.alignment.optical_intensity_radius},
        {"acoustic_waist_m", r.alignment.acoustic_waist},
        {"brillouin_frequency_Hz", r.coupling.brillouin_frequency},
        {"l1_suppression_dB", l1},
        {"modes", modes}}}};
}

inline FileSet design_files(const DesignReport& r) {
  FileSet out;
  out.add("design.json", to_json(r).dump(2) + "\n");
  io::CsvWriter modes({"index", "frequency_Hz", "linewidth_Hz"});
  for (const auto& m : r.optical_modes) {
    modes.row({std::to_string(m.index), io::format_number(m.frequency), io::format_number(m.linewidth)});
  }
  out.add("optical_modes.csv", modes.str());
  io::CsvWriter cmap({"family_index", "transverse_order", "frequency_Hz", "g0_Hz"});
  for (const auto& e : r.coupling.entries) {
    cmap.row({std::to_string(e.mode.family_index), std::to_string(e.mode.transverse_order),
              io::format_number(e.mode.frequency), io::format_number(e.g0)});
  }
  out.add("coupling_map.csv", cmap.str());
  return out;
}

// ---------------------------------------------------------------- fig2

struct TraceFit {
  SpectrumTrace trace;
  analysis::FitResult fit;
  bool ok = false;
  std::string error;
};

struct Fig2Result {
  std::vector<TraceFit> omit;
  std::vector<TraceFit> omia;
  analysis::RegressionResult regression;
  hertz g0 = 0.0;
  double photons_at_unity_c = 0.0;
  std::string error;  // empty when the regression succeeded
};

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return specsynth::KeyedNormal::mix(seed ^ specsynth::KeyedNormal::mix(stream));
}

inline specsynth::SynthSettings fig2_synth(const ScenarioConfig& c, int jobs) {
  specsynth::SynthSettings s;
  s.noise.averages = c.fig2.averages;
  s.noise.amplitude_noise = c.fig2.amplitude_noise;
  s.add_noise = c.add_noise;
  s.points_per_linewidth = c.fig2.points_per_linewidth;
  s.span_linewidths = c.fig2.span_linewidths;
  s.jobs = jobs;
  return s;
}

inline std::vector<TraceFit> fit_all(std::vector<SpectrumTrace> traces, analysis::Orientation o, int jobs) {
  std::vector<TraceFit> out(traces.size());
  parallel_for(traces.size(), jobs, [&](std::size_t i) {
    out[i].trace = std::move(traces[i]);
    try {
      out[i].fit = analysis::fit_lorentzian(out[i].trace, o);
      out[i].ok = true;
    } catch (const PhysicsError& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

inline std::vector<analysis::LinewidthPoint> linewidth_points(const std::vector<TraceFit>& fits) {
  std::vector<analysis::LinewidthPoint> pts;
  for (const auto& f : fits) {
    if (f.ok) pts.push_back({f.trace.metadata.transmitted_power, f.fit.fwhm, f.fit.uncertainties.fwhm});
  }
  return pts;
}

/// Synthetic OMIT + OMIA traces, per-trace fits, and the joint regression.
/// Fit failures are kept per trace; a failed regression is reported in
/// `error` with the fits left in place.
inline Fig2Result run_fig2(const ScenarioConfig& c, int jobs = 1) {
  const auto& p = c.system_params;
  const auto s = fig2_synth(c, jobs);
  Fig2Result r;
  if (!c.fig2.omit_powers.empty()) {
    r.omit = fit_all(specsynth::scenario_traces(p, c.fig2.omit_powers, TraceKind::omit, stream_seed(c.seed, 1), s),
                     analysis::Orientation::dip, jobs);
  }
  if (!c.fig2.omia_powers.empty()) {
    r.omia = fit_all(specsynth::scenario_traces(p, c.fig2.omia_powers, TraceKind::omia, stream_seed(c.seed, 2), s),
                     analysis::Orientation::peak, jobs);
  }
  try {
    r.regression = analysis::fit_linewidth_vs_power(linewidth_points(r.omit), linewidth_points(r.omia));
    r.photons_at_unity_c = dynamics::intracavity_photons(r.regression.power_at_unity_c, p);
    r.g0 = analysis::extract_g0(r.regression.gamma0, p.kappa, r.photons_at_unity_c);
  } catch (const PhysicsError& e) {
    r.error = e.what();
  }
  return r;
}

inline void add_traces_csv(io::CsvWriter& w, const std::vector<TraceFit>& fits) {
  for (const auto& f : fits) {
    const auto& t = f.trace;
    for (std::size_t i = 0; i < t.size(); ++i) {
      w.row({std::string(to_string(t.kind)), std::to_string(t.metadata.trace_index),
             io::format_number(t.metadata.transmitted_power), io::format_number(t.detunings[i]),
             io::format_number(t.values[i])});
    }
  }
}

inline void add_fits_csv(io::CsvWriter& w, const std::vector<TraceFit>& fits) {
  for (const auto& f : fits) {
    const auto num = [&](double v) { return f.ok ? io::format_number(v) : std::string("nan"); };
    w.row({std::string(to_string(f.trace.kind)), io::format_number(f.trace.metadata.transmitted_power),
           num(f.fit.center), num(f.fit.fwhm), num(f.fit.uncertainties.fwhm), num(f.fit.area),
           num(f.fit.peak_height), num(f.fit.background), num(f.fit.residual_norm), f.ok ? "1" : "0", f.error});
  }
}

inline const std::vector<std::string>& fits_header() {
  static const std::vector<std::string> h{"kind", "power_W", "center_Hz", "fwhm_Hz", "fwhm_sigma_Hz", "area",
                                          "peak_height", "background", "residual_rms", "ok", "error"};
  return h;
}

inline void add_fig2_fit_files(FileSet& out, const std::vector<TraceFit>& omit, const std::vector<TraceFit>& omia) {
  io::CsvWriter traces({"kind", "trace_index", "power_W", "detuning_Hz", "value"});
  add_traces_csv(traces, omit);
  add_traces_csv(traces, omia);
  out.add("fig2_traces.csv", traces.str());
  io::CsvWriter fits(fits_header());
  add_fits_csv(fits, omit);
  add_fits_csv(fits, omia);
  out.add("fig2_fits.csv", fits.str());

  // Linewidth against signed power: OMIA at -P.
  std::string dat = "# signed_power_W fwhm_Hz fwhm_sigma_Hz\n";
  for (const auto* set : {&omia, &omit}) {
    for (const auto& f : *set) {
      if (!f.ok) continue;
      const double sign = f.trace.kind == TraceKind::omia ? -1.0 : 1.0;
      dat += io::format_number(sign * f.trace.metadata.transmitted_power) + ' ' + io::format_number(f.fit.fwhm) +
             ' ' + io::format_number(f.fit.uncertainties.fwhm) + '\n';
    }
  }
  out.add("fig2_linewidth.dat", dat);
}

inline json to_json(const Fig2Result& r) {
  const auto& g = r.regression;
  return {{"gamma0_Hz", g.gamma0},
          {"gamma0_sigma_Hz", g.gamma0_sigma},
          {"power_at_unity_c_W", g.power_at_unity_c},
          {"power_at_unity_c_sigma_W", g.power_sigma},
          {"slope_Hz_per_W", g.slope},
          {"photons_at_unity_c", r.photons_at_unity_c},
          {"g0_Hz", r.g0},
          {"regression_points", g.points},
          {"weighted", g.weighted}};
}

inline std::string fig2_gnuplot(const Fig2Result& r) {
  return "# gnuplot -p fig2.gp\n"
         "set xlabel 'signed transmitted power (W)'\n"
         "set ylabel 'linewidth (Hz)'\n"
         "plot 'fig2_linewidth.dat' using 1:2:3 with yerrorbars title 'fits', \\\n"
         "     " + io::format_number(r.regression.gamma0) + "*(1+x/" +
         io::format_number(r.regression.power_at_unity_c) + ") title 'regression'\n";
}

inline FileSet fig2_files(const Fig2Result& r) {
  FileSet out;
  add_fig2_fit_files(out, r.omit, r.omia);
  if (r.error.empty()) {
    out.add("fig2_summary.json", to_json(r).dump(2) + "\n");
    out.add("fig2.gp", fig2_gnuplot(r));
  }
  return out;
}

// ---------------------------------------------------------------- fig3

struct Fig3Result {
  Fig2Result calibration;
  std::vector<SpectrumTrace> traces;
  std::vector<analysis::CoolingPoint> table;
  double area_asymptote = 0.0;
};

inline Fig3Result run_fig3(const ScenarioConfig& c, int jobs = 1) {
  if (c.fig3.powers.empty()) fail(Errc::empty_input, "fig3.powers is empty");
  Fig3Result r;
  r.calibration = run_fig2(c, jobs);
  if (!r.calibration.error.empty()) throw PhysicsError(Errc::insufficient_data, "calibration failed: " + r.calibration.error);
  specsynth::SynthSettings s;
  s.noise.averages = c.fig3.averages;
  s.add_noise = c.add_noise;
  s.points_per_linewidth = c.fig3.points_per_linewidth;
  s.span_linewidths = c.fig3.span_linewidths;
  s.jobs = jobs;
  r.traces = specsynth::scenario_traces(c.system_params, c.fig3.powers, TraceKind::spontaneous_psd,
                                        stream_seed(c.seed, 3), s);
  r.table = analysis::build_cooling_table(r.traces, c.system_params, r.calibration.regression);
  r.area_asymptote = analysis::area_asymptote(r.table);
  return r;
}

inline const analysis::CoolingPoint& highest_power_point(const Fig3Result& r) {
  const analysis::CoolingPoint* best = &r.table.front();
  for (const auto& pt : r.table) {
    if (pt.transmitted_power > best->transmitted_power) best = &pt;
  }
  return *best;
}

inline FileSet fig3_files(const Fig3Result& r) {
  FileSet out;
  io::CsvWriter traces({"kind", "trace_index", "power_W", "detuning_Hz", "value"});
  for (const auto& t : r.traces) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      traces.row({std::string(to_string(t.kind)), std::to_string(t.metadata.trace_index),
                  io::format_number(t.metadata.transmitted_power), io::format_number(t.detunings[i]),
                  io::format_number(t.values[i])});
    }
  }
  out.add("fig3_traces.csv", traces.str());

  io::CsvWriter table({"power_W", "cooperativity", "linewidth_Hz", "linewidth_sigma_Hz", "area", "area_sigma",
                       "n_linewidth", "n_linewidth_sigma", "n_area", "n_area_sigma", "normalized_brightness",
                       "normalized_area", "c_over_1_plus_c", "ok", "error"});
  for (const auto& pt : r.table) {
    const auto f = io::format_number;
    table.row({f(pt.transmitted_power), f(pt.cooperativity), f(pt.linewidth), f(pt.linewidth_sigma), f(pt.area),
               f(pt.area_sigma), f(pt.occupation_from_linewidth), f(pt.occupation_from_linewidth_sigma),
               f(pt.occupation_from_area), f(pt.occupation_from_area_sigma), f(pt.normalized_brightness),
               f(pt.normalized_area), f(pt.cooperativity / (1.0 + pt.cooperativity)), pt.ok ? "1" : "0", pt.error});
  }
  out.add("fig3_cooling_table.csv", table.str());

  const auto& last = highest_power_point(r);
  json summary = {{"calibration", to_json(r.calibration)},
                  {"area_asymptote", r.area_asymptote},
                  {"final",
                   {{"power_W", last.transmitted_power},
                    {"cooperativity", last.cooperativity},
                    {"ok", last.ok},
                    {"occupation_from_linewidth", last.occupation_from_linewidth},
                    {"occupation_from_linewidth_sigma", last.occupation_from_linewidth_sigma},
                    {"occupation_from_area", last.occupation_from_area},
                    {"occupation_from_area_sigma", last.occupation_from_area_sigma}}}};
  out.add("fig3_summary.json", summary.dump(2) + "\n");
  out.add("fig3.gp",
          "# gnuplot -p fig3.gp\n"
          "set datafile separator ','\n"
          "set logscale xy\n"
          "set xlabel 'transmitted power (W)'\n"
          "set ylabel 'phonon occupation'\n"
          "plot 'fig3_cooling_table.csv' using 1:7:8 skip 1 with yerrorbars title 'linewidth', \\\n"
          "     'fig3_cooling_table.csv' using 1:9:10 skip 1 with yerrorbars title 'area'\n");
  return out;
}

// ---------------------------------------------------------------- sweep

struct SweepAxis {
  std::string path;
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 0;

  double value(std::size_t i) const {
    if (count == 1) return start;
    return start + ((stop - start) * static_cast<double>(i)) / static_cast<double>(count - 1);
  }
};

/// Parses "dotted.path=start:stop:count".
inline SweepAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("grid axis must look like path=start:stop:count: " + spec);
  SweepAxis a;
  a.path = spec.substr(0, eq);
  const std::string range = spec.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
  if (c2 == std::string::npos) throw UsageError("grid axis must look like path=start:stop:count: " + spec);
  try {
    std::size_t used = 0;
    a.start = std::stod(range.substr(0, c1));
    a.stop = std::stod(range.substr(c1 + 1, c2 - c1 - 1));
    const std::string count = range.substr(c2 + 1);
    const long n = std::stol(count, &used);
    if (used != count.size() || n < 0) throw std::invalid_argument("count");
    a.count = static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw UsageError("malformed grid axis: " + spec);
  }
  return a;
}

struct SweepRow {
  std::vector<double> coordinates;
  std::vector<double> outputs;
  std::string error;
};

inline const std::vector<std::string>& sweep_output_names() {
  static const std::vector<std::string> names{
      "acoustic_fsr_Hz", "transverse_spacing_Hz", "acoustic_waist_m", "optical_fsr_Hz", "kappa_Hz",
      "g0_L0_Hz",        "g0_L1_Hz",              "l1_suppression_dB", "power_at_unity_c_W", "occupation_at_max_power"};
  return names;
}

/// Scalar design/dynamics outputs of one configuration (no resonance search).
inline std::vector<double> sweep_outputs(const ScenarioConfig& c) {
  const auto& hb = c.hbar_geometry;
  const auto& sp = c.system_params;
  const auto map = design_coupling_map(c);
  double g_l0 = 0.0, g_l1 = 0.0;
  {
    const coupling::CouplingEntry* l0 = nullptr;
    for (const auto& e : map.entries) {
      if (e.mode.transverse_order == 0 &&
          (!l0 || std::abs(e.mode.frequency - sp.phonon_frequency) < std::abs(l0->mode.frequency - sp.phonon_frequency)))
        l0 = &e;
    }
    if (l0) {
      g_l0 = l0->g0;
      for (const auto& e : map.entries)
        if (e.mode.transverse_order == 1 && e.mode.family_index == l0->mode.family_index) g_l1 = e.g0;
    }
  }
  const double fsr = optcavity::nominal_fsr(c.optical_geometry);
  double p_max = 0.0;
  for (double p : c.fig3.powers) p_max = std::max(p_max, p);
  const double c_max = dynamics::cooperativity(sp, dynamics::intracavity_photons(p_max, sp));
  return {resonator::acoustic_fsr(hb),
          resonator::transverse_mode_spacing(hb),
          resonator::acoustic_waist(hb, sp.phonon_frequency),
          fsr,
          optcavity::cavity_linewidth(fsr, optcavity::finesse(c.optical_geometry)),
          g_l0,
          g_l1,
          coupling::l1_suppression_db(map, sp.phonon_frequency),
          dynamics::power_for_cooperativity(sp, 1.0),
          dynamics::steady_state_occupation(sp, c_max)};
}

/// Cartesian grid over dotted config paths, first axis slowest. Cells run in
/// parallel; rows come back in grid order and errors stay in their row.
inline std::vector<SweepRow> sweep(const json& resolved, const std::vector<SweepAxis>& axes, int jobs = 1) {
  if (axes.empty()) throw UsageError("sweep grid is empty");
  std::size_t cells = 1;
  for (const auto& a : axes) {
    if (a.count == 0) throw UsageError("sweep axis " + a.path + " has no points");
    cells *= a.count;
  }
  if (jobs < 1) throw UsageError("jobs must be >= 1");
  // Unknown paths are usage errors, not per-cell failures.
  for (const auto& a : axes) {
    json probe = resolved;
    try {
      config::set_path(probe, a.path, a.start);
    } catch (const ConfigError& e) {
      throw UsageError(std::string("bad sweep axis: ") + e.what());
    }
  }

  std::vector<SweepRow> rows(cells);
  parallel_for(cells, jobs, [&](std::size_t cell) {
    auto& row = rows[cell];
    std::size_t rem = cell;
    row.coordinates.resize(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      row.coordinates[k] = axes[k].value(rem % axes[k].count);
      rem /= axes[k].count;
    }
    try {
      json doc = resolved;
      for (std::size_t k = 0; k < axes.size(); ++k) config::set_path(doc, axes[k].path, row.coordinates[k]);
      row.outputs = sweep_outputs(config::from_json(doc));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows) {
  std::vector<std::string> header;
  for (const auto& a : axes) header.push_back(a.path);
  for (const auto& n : sweep_output_names()) header.push_back(n);
  header.push_back("error");
  io::CsvWriter w(header);
  for (const auto& r : rows) {
    std::vector<std::string> fields;
    for (double v : r.coordinates) fields.push_back(io::format_number(v));
    for (std::size_t i = 0; i < sweep_output_names().size(); ++i) {
      fields.push_back(r.outputs.empty() ? std::string() : io::format_number(r.outputs[i]));
    }
    fields.push_back(r.error);
    w.row(fields);
  }
  return w.str();
}

/// Linear interpolation of the first crossing of `column` through `level`
/// along a one-axis sweep; NaN when none.
inline double first_crossing(const std::vector<SweepRow>& rows, std::size_t column, double level) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (a.outputs.empty() || b.outputs.empty()) continue;
    const double ya = a.outputs[column], yb = b.outputs[column];
    if (!std::isfinite(ya) && std::isfinite(yb) && yb <= level) return b.coordinates[0];
    if ((ya - level) * (yb - level) <= 0.0 && ya != yb && std::isfinite(ya) && std::isfinite(yb)) {
      return a.coordinates[0] + (level - ya) / (yb - ya) * (b.coordinates[0] - a.coordinates[0]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace phonon_lab::pipelines
