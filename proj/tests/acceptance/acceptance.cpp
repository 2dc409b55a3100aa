// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"
#include "phonon_lab/phonon_lab.hpp"

using namespace phonon_lab;
using config::json;

namespace {

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  std::vector<Check> checks;

  void add(const std::string& name, bool ok, const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    checks.push_back({name, ok, buf});
  }
  void info(const std::string& name, const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    checks.push_back({"(info) " + name, true, buf});
  }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
  }
};

json configs(const std::string& name) {
  return config::resolve(config::read_file(std::string(PHONON_LAB_CONFIGS) + "/" + name));
}

Criterion geometry() {
  Criterion cr{1, "geometry closure", {}};
  const auto c = config::paper();
  const auto& hb = c.hbar_geometry;
  const double fsr = resonator::acoustic_fsr(hb);
  cr.add("acoustic FSR", within(fsr, 6.04e6, 1e-12), "%.6f MHz (target 6.04, exact)", fsr / 1e6);
  const double dnu = resonator::transverse_mode_spacing(hb);
  cr.add("transverse spacing", within(dnu, 140e3, 0.05), "%.2f kHz vs 140 kHz (<= 5%%)", dnu / 1e3);
  const double w = resonator::acoustic_waist(hb, 12.66e9);
  cr.add("acoustic waist", within(w, 31e-6, 0.10), "%.3f um at 12.66 GHz vs 31 um (<= 10%%)", w * 1e6);
  const auto ow = optcavity::optical_waist(c.optical_geometry);
  cr.add("optical intensity radius", within(ow.intensity_radius, 39e-6, 0.03), "%.3f um vs 39 um (<= 3%%)",
         ow.intensity_radius * 1e6);
  const double fsr_opt = optcavity::nominal_fsr(c.optical_geometry);
  const double kappa = optcavity::cavity_linewidth(fsr_opt, optcavity::finesse(c.optical_geometry));
  cr.add("cavity linewidth", within(kappa, 4e6, 0.10), "%.4f MHz vs 4 MHz (<= 10%%)", kappa / 1e6);
  return cr;
}

Criterion thermal() {
  Criterion cr{2, "thermal occupation and f.Q", {}};
  const double n = resonator::thermal_occupation(12.607e9, 13.6);
  cr.add("n(12.607 GHz, 13.6 K)", std::abs(n - 21.98) < 0.005 && within(n, 22.4, 0.03),
         "%.4f (expected 21.98) vs adopted 22.4 (<= 3%%)", n);
  resonator::AcousticMode m;
  m.frequency = 12.66e9;
  m.intrinsic_linewidth = 590.0;
  m.q_factor = m.frequency / m.intrinsic_linewidth;
  const auto coh = resonator::coherence_metrics(m);
  cr.add("f.Q at 12.66 GHz, 590 Hz", within(coh.fq_product, 2.7e17, 0.02), "%.4e Hz vs 2.7e17 (<= 2%%)",
         coh.fq_product);
  cr.info("n(12.66 GHz, 7 K)", "%.3f", resonator::thermal_occupation(12.66e9, 7.0));
  return cr;
}

Criterion self_consistency() {
  Criterion cr{3, "parameter-set self-consistency", {}};
  dynamics::SystemParams p;  // g0 6.08 Hz, Gamma0 600 Hz, kappa 4.07 MHz
  p.eta_ext = 0.5;
  const double nc = dynamics::photons_for_cooperativity(p, 1.0);
  cr.add("photons for C = 1", within(nc, 1.65e7, 0.005), "%.4e (expected 1.65e7)", nc);
  const double pw = dynamics::power_for_cooperativity(p, 1.0);
  cr.add("power for C = 1 at eta_ext 0.5", within(pw, 22.8e-6, 0.25) && std::abs(pw * 1e6 - 27.0) < 0.5,
         "%.3f uW (expected 27) vs 22.8 uW (<= 25%%)", pw * 1e6);
  return cr;
}

Criterion fig2_pipeline() {
  Criterion cr{4, "fig2 pipeline over 100 seeds", {}};
  const json doc = config::paper_preset();
  const auto base = config::from_json(doc);
  const double gamma0 = base.system_params.gamma0;
  const double p1 = dynamics::power_for_cooperativity(base.system_params, 1.0);
  int good = 0, failed = 0;
  double worst_g = 0.0, worst_p = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto c = base;
    c.seed = seed;
    const auto r = pipelines::run_fig2(c, jobs());
    if (!r.error.empty()) {
      ++failed;
      continue;
    }
    const double dg = std::abs(r.regression.gamma0 - gamma0), dp = std::abs(r.regression.power_at_unity_c - p1);
    worst_g = std::max(worst_g, dg);
    worst_p = std::max(worst_p, dp);
    if (dg <= 30.0 && dp <= 1.2e-6) ++good;
  }
  cr.add("seeds within +-30 Hz and +-1.2 uW", good >= 90, "%d/100 (need >= 90), %d regression failures", good,
         failed);
  cr.info("worst deviations", "Gamma0 %.2f Hz, P1 %.3f uW (truth %.4f uW)", worst_g, worst_p * 1e6, p1 * 1e6);
  return cr;
}

double area_residual(const pipelines::Fig3Result& r) {
  double worst = 0.0;
  for (const auto& pt : r.table) {
    if (!pt.ok) return std::numeric_limits<double>::infinity();
    const double s = pt.cooperativity / (1.0 + pt.cooperativity);
    worst = std::max(worst, std::abs(pt.normalized_area - s) / s);
  }
  return worst;
}

Criterion fig3_pipeline() {
  Criterion cr{5, "fig3 pipeline", {}};
  const auto clean = pipelines::run_fig3(config::from_json(configs("noiseless.json")), jobs());
  const auto& last = pipelines::highest_power_point(clean);
  cr.add("noiseless n from linewidth at 1.3 mW", last.ok && within(last.occupation_from_linewidth, 0.386, 0.01),
         "%.5f (0.386 +- 1%%), C = %.2f", last.occupation_from_linewidth, last.cooperativity);
  cr.add("noiseless n from area at 1.3 mW", last.ok && within(last.occupation_from_area, 0.386, 0.01),
         "%.5f (0.386 +- 1%%)", last.occupation_from_area);
  const double res = area_residual(clean);
  cr.add("noiseless area trend vs C/(1+C)", res < 0.02, "max relative residual %.2e (< 2%%)", res);

  const auto base = config::paper();
  double worst_lw = 0.0, worst_area = 0.0, worst_res = 0.0;
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = base;
    c.seed = seed;
    try {
      const auto r = pipelines::run_fig3(c, jobs());
      const auto& pt = pipelines::highest_power_point(r);
      if (!pt.ok) {
        ++failures;
        continue;
      }
      worst_lw = std::max(worst_lw, pt.occupation_from_linewidth);
      worst_area = std::max(worst_area, pt.occupation_from_area);
      worst_res = std::max(worst_res, area_residual(r));
    } catch (const PhysicsError&) {
      ++failures;
    }
  }
  cr.add("noisy n at 1.3 mW, 20 seeds", failures == 0 && worst_lw < 0.45 && worst_area < 0.45,
         "worst linewidth %.4f, worst area %.4f (< 0.45), %d failures", worst_lw, worst_area, failures);
  cr.info("noisy area trend", "worst max relative residual %.3f", worst_res);
  return cr;
}

Criterion oracles() {
  Criterion cr{6, "oracle suites", {}};
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> radius(15e-6, 60e-6), frac(0.0, 1.5);
  std::uniform_int_distribution<int> order(0, 3);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double wo = radius(rng), wa = radius(rng), d = frac(rng) * wa;
    const int m = order(rng);
    const double a = coupling::transverse_overlap({d, wo, wa}, m);
    worst = std::max(worst, std::abs(a - oracle::overlap_2d(d, wo, wa, m)));
  }
  cr.add("transverse overlap, 20 random cases", worst <= 1e-6, "max |diff| %.2e (<= 1e-6)", worst);

  resonator::HbarGeometry hb;
  worst = 0.0;
  for (int k = -40; k <= 40; ++k) {
    const double f = 12.607e9 + k * 0.37e6;
    const double a = coupling::phase_match_envelope(f, 12.607e9, hb);
    worst = std::max(worst, std::abs(a - oracle::phase_integral(f, 12.607e9, hb.sound_velocity, hb.length)));
  }
  cr.add("phase-match envelope vs integral", worst <= 1e-6, "max |diff| %.2e (<= 1e-6)", worst);

  const optcavity::OpticalCavityGeometry og = config::paper().optical_geometry;
  const double center = 193.4e12, span = 400e9;
  optcavity::ResonanceSearch search;
  search.jobs = jobs();
  const auto modes = optcavity::resonance_spectrum(og, span, center, search);
  const auto ref = oracle::resonances(og, center - 0.5 * span, center + 0.5 * span, 200e6);
  worst = modes.size() == ref.size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < std::min(modes.size(), ref.size()); ++i)
    worst = std::max(worst, std::abs(modes[i].frequency - ref[i]));
  cr.add("optical resonances vs dense-scan roots", worst <= 1e3, "%zu modes, max |diff| %.3f Hz (<= 1 kHz)",
         modes.size(), worst);

  dynamics::SystemParams p;
  auto map = coupling::single_mode_map(p.phonon_frequency, p.gamma0, p.g0);
  auto side = map.entries.front();
  side.mode.frequency = p.phonon_frequency - 136e3;
  side.g0 = 0.3 * p.g0;
  map.entries.insert(map.entries.begin(), side);
  side.mode.frequency = p.phonon_frequency + 6.04e6;
  side.g0 = 0.6 * p.g0;
  map.entries.push_back(side);
  const auto grid = uniform_grid(0.0, 14e6, 4001);
  double worst_rel = 0.0;
  for (double c : {0.1, 0.9}) {
    const double nc = dynamics::photons_for_cooperativity(p, c);
    const auto red = dynamics::omit_transmission(map, p, nc, grid);
    const auto blue = dynamics::omia_transmission(map, p, nc, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = oracle::linear_solve_transmission(map, p, nc, grid[i], false);
      const double b = oracle::linear_solve_transmission(map, p, nc, grid[i], true);
      worst_rel = std::max({worst_rel, std::abs(red.values[i] / r - 1.0), std::abs(blue.values[i] / b - 1.0)});
    }
  }
  for (double c : {5.0, 57.0}) {
    const double nc = dynamics::photons_for_cooperativity(p, c);
    const auto red = dynamics::omit_transmission(map, p, nc, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = oracle::linear_solve_transmission(map, p, nc, grid[i], false);
      worst_rel = std::max(worst_rel, std::abs(red.values[i] / r - 1.0));
    }
  }
  cr.add("OMIT/OMIA vs linear solve", worst_rel <= 1e-9, "max relative diff %.2e (<= 1e-9)", worst_rel);
  return cr;
}

bool self_oscillates(const dynamics::SystemParams& p, double c, dynamics::PumpMode mode) {
  try {
    dynamics::effective_linewidth(p, c, mode);
    return false;
  } catch (const PhysicsError& e) {
    return e.code() == Errc::self_oscillation;
  }
}

template <typename T>
bool same_traces(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].values != b[i].values || a[i].detunings != b[i].detunings) return false;
  return true;
}

Criterion invariants() {
  Criterion cr{7, "invariant suites", {}};
  double worst = 0.0;
  for (double w : {10e-6, 32.7e-6, 80e-6})
    for (double d = 0.0; d <= 3.0 * w; d += 0.25 * w) {
      double sum = 0.0;
      for (int m = 0; m <= 60; ++m) sum += coupling::transverse_overlap({d, w, w}, m);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  cr.add("Poisson normalization", worst <= 1e-9, "max |sum - 1| %.2e (<= 1e-9)", worst);

  // Width of the fitted OMIT dip / OMIA peak against Gamma0 (1 +- C).
  dynamics::SystemParams p;
  const auto map = coupling::single_mode_map(p.phonon_frequency, p.gamma0, p.g0);
  double worst_lin = 0.0, worst_c = 0.0;
  std::string detail;
  auto probe = [&](double c, bool blue) {
    const double w = p.gamma0 * (blue ? 1.0 - c : 1.0 + c);
    const auto grid = specsynth::feature_grid(w, {});
    const double nc = dynamics::photons_for_cooperativity(p, c);
    const auto t = blue ? dynamics::omia_transmission(map, p, nc, grid) : dynamics::omit_transmission(map, p, nc, grid);
    const auto fit = analysis::fit_lorentzian(t, blue ? analysis::Orientation::peak : analysis::Orientation::dip);
    const double dev = std::abs(fit.fwhm / w - 1.0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s C=%g %+.4f%%; ", blue ? "OMIA" : "OMIT", c, 100.0 * (fit.fwhm / w - 1.0));
    detail += buf;
    if (dev > worst_lin) {
      worst_lin = dev;
      worst_c = c;
    }
  };
  for (double c : {0.1, 0.5, 1.0, 5.0, 20.0, 57.0}) probe(c, false);
  for (double c : {0.1, 0.5}) probe(c, true);
  cr.add("Gamma_eff linear in C (fitted width)", worst_lin <= 1e-3, "worst %.3f%% at C = %g (<= 0.1%%)",
         100.0 * worst_lin, worst_c);
  cr.info("Gamma_eff deviations", "%s", detail.c_str());

  double worst_ulp = 0.0;
  for (double c : {0.0, 0.01, 0.1, 0.5, 1.0, 3.7, 10.0, 57.0, 1e3, 1e6}) {
    const double prod = dynamics::steady_state_occupation(p, c) * (1.0 + c);
    const double ulp = std::nextafter(p.n_th, 1e300) - p.n_th;
    worst_ulp = std::max(worst_ulp, std::abs(prod - p.n_th) / ulp);
  }
  cr.add("n (1 + C) = n_th", worst_ulp <= 1.0, "max deviation %.0f ulp (<= 1 rounding)", worst_ulp);

  bool iff = true;
  for (double c : {0.0, 0.5, 0.999, 1.0, 1.001, 2.0, 57.0}) {
    iff &= !self_oscillates(p, c, dynamics::PumpMode::red);
    iff &= self_oscillates(p, c, dynamics::PumpMode::blue) == (c >= 1.0);
  }
  cr.add("self-oscillation iff blue and C >= 1", iff, "%s", iff ? "holds on 7 cooperativities" : "violated");

  auto c = config::paper();
  const std::vector<double> powers = c.fig3.powers;
  bool same = true;
  specsynth::SynthSettings s;
  s.jobs = 1;
  const auto ref = specsynth::scenario_traces(c.system_params, powers, TraceKind::spontaneous_psd, 9, s);
  for (int j : {1, 2, 7, 32}) {
    s.jobs = j;
    same &= same_traces(ref, specsynth::scenario_traces(c.system_params, powers, TraceKind::spontaneous_psd, 9, s));
  }
  const auto f2a = pipelines::run_fig2(c, 1), f2b = pipelines::run_fig2(c, 13);
  for (std::size_t i = 0; i < f2a.omit.size(); ++i) same &= f2a.omit[i].fit.fwhm == f2b.omit[i].fit.fwhm;
  same &= f2a.regression.gamma0 == f2b.regression.gamma0;
  const json doc = configs("alignment_sweep.json");
  const std::vector<pipelines::SweepAxis> axes{{"design.alignment.transverse_offset", 0.0, 1e-5, 21},
                                               {"system_params.g0", 5.0, 7.0, 3}};
  same &= pipelines::sweep_csv(axes, pipelines::sweep(doc, axes, 1)) ==
          pipelines::sweep_csv(axes, pipelines::sweep(doc, axes, 16));
  optcavity::ResonanceSearch one, many;
  many.jobs = 9;
  const auto ra = optcavity::resonance_spectrum(c.optical_geometry, 300e9, 193.4e12, one);
  const auto rb = optcavity::resonance_spectrum(c.optical_geometry, 300e9, 193.4e12, many);
  same &= ra.size() == rb.size();
  for (std::size_t i = 0; same && i < ra.size(); ++i) same &= ra[i].frequency == rb[i].frequency;
  cr.add("bitwise determinism across threads and replays", same, "%s",
         same ? "synth, fig2 fits, sweep CSV, resonance search identical" : "mismatch");
  return cr;
}

Criterion selectivity() {
  Criterion cr{8, "alignment selectivity", {}};
  const json doc = configs("alignment_sweep.json");
  const std::vector<pipelines::SweepAxis> axes{{"design.alignment.transverse_offset", 0.0, 10e-6, 101}};
  const auto rows = pipelines::sweep(doc, axes, jobs());
  const auto& names = pipelines::sweep_output_names();
  const auto col = static_cast<std::size_t>(std::find(names.begin(), names.end(), "l1_suppression_dB") - names.begin());
  const double d20 = pipelines::first_crossing(rows, col, 20.0);
  cr.add("20 dB boundary", within(d20, 4.6e-6, 0.02), "d = %.4f um vs 4.6 um (+- 2%%)", d20 * 1e6);

  // Oracle: Poisson ratio 1/xi with xi = d^2 / (2 w^2), times the squared
  // ratio of the phase-match integrals of the L0 and L1 modes of the family.
  const auto c = config::from_json(doc);
  const auto& hb = c.hbar_geometry;
  const double fb = c.design.brillouin_frequency, fsr = resonator::acoustic_fsr(hb);
  const double f0 = std::round(c.system_params.phonon_frequency / fsr) * fsr;
  const double f1 = f0 + resonator::transverse_mode_spacing(hb);
  const double e0 = oracle::phase_integral(f0, fb, hb.sound_velocity, hb.length);
  const double e1 = oracle::phase_integral(f1, fb, hb.sound_velocity, hb.length);
  const double w = 32.7e-6;
  const double xi = 0.01 * (e0 * e0) / (e1 * e1);
  const double d_oracle = w * std::sqrt(2.0 * xi);
  cr.add("boundary vs Poisson-ratio oracle", within(d20, d_oracle, 1e-3), "oracle %.4f um (+- 0.1%%)",
         d_oracle * 1e6);
  cr.info("overlap-only Poisson boundary", "%.4f um (w sqrt(0.02))", w * std::sqrt(0.02) * 1e6);
  return cr;
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<std::function<Criterion()>> suites{geometry, thermal,   self_consistency, fig2_pipeline,
                                                       fig3_pipeline, oracles, invariants,     selectivity};
  int failed = 0;
  for (const auto& suite : suites) {
    Criterion cr;
    try {
      cr = suite();
    } catch (const std::exception& e) {
      cr.checks.push_back({"exception", false, e.what()});
    }
    for (const auto& ch : cr.checks) std::printf("    %-4s %s: %s\n", ch.ok ? "ok" : "BAD", ch.name.c_str(), ch.detail.c_str());
    std::printf("%s criterion %d: %s\n", cr.passed() ? "PASS" : "FAIL", cr.id, cr.title.c_str());
    failed += cr.passed() ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, suites.size());
  return failed == 0 ? 0 : 1;
}
