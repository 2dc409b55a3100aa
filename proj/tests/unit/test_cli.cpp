#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "phonon_lab/phonon_lab.hpp"

using namespace phonon_lab;
using config::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("phonon_lab_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(PHONON_LAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string configs(const std::string& name) { return std::string(PHONON_LAB_CONFIGS) + "/" + name; }

template <typename Fn>
std::string config_error_key(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, PresetLoads) {
  const auto c = config::paper();
  EXPECT_EQ(c.system_params.g0, 6.08);
  EXPECT_EQ(c.system_params.gamma0, 600.0);
  EXPECT_EQ(c.system_params.phonon_frequency, 12.607e9);
  EXPECT_EQ(c.fig3.powers.back(), 1.3e-3);
  EXPECT_EQ(c.seed, 1u);
}

TEST(Config, MissingKeyIsNamed) {
  json doc = config::paper_preset();
  doc["system_params"].erase("g0");
  EXPECT_EQ(config_error_key([&] { config::from_json(config::resolve(doc)); }), "system_params.g0");
  json doc2 = config::paper_preset();
  doc2.erase("fig3");
  EXPECT_EQ(config_error_key([&] { config::from_json(config::resolve(doc2)); }), "fig3");
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_EQ(config_error_key([] { config::load_text(R"({"defaults": "paper", "system_params": {"g_0": 6}})"); }),
            "system_params.g_0");
  EXPECT_EQ(config_error_key([] { config::load_text(R"({"defaults": "paper", "extra": 1})"); }), "extra");
  EXPECT_EQ(config_error_key([] { config::load_text(R"({"defaults": "other"})"); }), "defaults");
}

TEST(Config, TypeErrorsNamed) {
  EXPECT_EQ(config_error_key([] { config::load_text(R"({"defaults": "paper", "system_params": {"g0": "six"}})"); }),
            "system_params.g0");
  EXPECT_EQ(config_error_key([] { config::load_text(R"({"defaults": "paper", "synth": {"seed": -1}})"); }),
            "synth.seed");
}

TEST(Config, ParseErrorReportsLine) {
  const std::string text = "{\n  \"defaults\": \"paper\",\n  \"synth\": {\"seed\": 3,}\n}\n";
  EXPECT_EQ(config_error_key([&] { config::load_text(text, "x.json"); }), "x.json:3");
}

TEST(Config, OverlayKeepsPreset) {
  const auto c = config::load_text(R"({"defaults": "paper", "system_params": {"g0": 5.0}})");
  EXPECT_EQ(c.system_params.g0, 5.0);
  EXPECT_EQ(c.system_params.kappa, config::paper().system_params.kappa);
}

TEST(Config, PhysicsValidation) {
  EXPECT_THROW(config::load_text(R"({"defaults": "paper", "system_params": {"kappa": -1}})"), PhysicsError);
  EXPECT_THROW(config::load_text(R"({"defaults": "paper", "fig2": {"averages": 0.5}})"), ConfigError);
}

TEST(Config, SetPath) {
  json doc = config::paper_preset();
  config::set_path(doc, "design.alignment.transverse_offset", 2e-6);
  EXPECT_EQ(doc["design"]["alignment"]["transverse_offset"].get<double>(), 2e-6);
  config::set_path(doc, "design.alignment.acoustic_waist", 3e-5);
  EXPECT_EQ(doc["design"]["alignment"]["acoustic_waist"].get<double>(), 3e-5);
  config::set_path(doc, "design.max_transverse", 2.6);
  EXPECT_EQ(doc["design"]["max_transverse"].get<int>(), 3);
  EXPECT_EQ(config_error_key([&] { config::set_path(doc, "design.nope", 1.0); }), "design.nope");
  EXPECT_THROW(config::set_path(doc, "design", 1.0), ConfigError);
  EXPECT_THROW(config::set_path(doc, "output_dir", 1.0), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"paper.json", "alignment_sweep.json", "noiseless.json", "quartz_handbook.json"}) {
    EXPECT_NO_THROW(config::load_file(configs(name))) << name;
  }
  EXPECT_FALSE(config::load_file(configs("noiseless.json")).add_noise);
}

TEST(Sweep, AxisParsing) {
  const auto a = pipelines::parse_axis("design.alignment.transverse_offset=0:1e-5:101");
  EXPECT_EQ(a.path, "design.alignment.transverse_offset");
  EXPECT_EQ(a.count, 101u);
  EXPECT_EQ(a.value(0), 0.0);
  EXPECT_EQ(a.value(100), 1e-5);
  EXPECT_EQ(a.value(10), 1e-6);
  EXPECT_THROW(pipelines::parse_axis("x=1:2"), UsageError);
  EXPECT_THROW(pipelines::parse_axis("=1:2:3"), UsageError);
  EXPECT_THROW(pipelines::parse_axis("x=a:2:3"), UsageError);
}

TEST(Sweep, GridOrderAndErrors) {
  const json doc = config::resolve(config::read_file(configs("alignment_sweep.json")));
  const std::vector<pipelines::SweepAxis> axes{{"design.alignment.transverse_offset", 0.0, 4e-6, 3},
                                               {"system_params.g0", 5.0, 6.0, 2}};
  const auto rows = pipelines::sweep(doc, axes, 4);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].coordinates[0], 0.0);
  EXPECT_EQ(rows[1].coordinates[1], 6.0);
  EXPECT_EQ(rows[2].coordinates[0], 2e-6);
  EXPECT_TRUE(rows[5].error.empty());
  const auto bad = pipelines::sweep(doc, {{"system_params.kappa", -1.0, 1.0, 2}}, 1);
  EXPECT_FALSE(bad[0].error.empty());
  EXPECT_TRUE(bad[1].error.empty());
  EXPECT_THROW(pipelines::sweep(doc, {{"system_params.nope", 0.0, 1.0, 2}}, 1), UsageError);
  EXPECT_THROW(pipelines::sweep(doc, {}, 1), UsageError);
}

TEST(Pipelines, DesignReport) {
  const auto r = pipelines::design(config::paper(), 4);
  EXPECT_NEAR(r.acoustic_fsr, 6.04e6, 1e-3);
  EXPECT_NEAR(r.transverse_spacing, 136061.3, 0.5);
  EXPECT_NEAR(r.kappa / 1e6, 4.075, 0.001);
  EXPECT_NEAR(r.optical_waist.intensity_radius * 1e6, 38.47, 0.01);
  EXPECT_NEAR(r.pair.pair_spacing / 1e9, 12.6079, 1e-3);
  EXPECT_GT(r.pair.stokes_suppression, 1e3);
  EXPECT_NEAR(r.thermal_occupation, 21.98, 0.005);
  const auto files = pipelines::design_files(r);
  ASSERT_NE(files.find("design.json"), nullptr);
  EXPECT_NO_THROW(json::parse(*files.find("design.json")));
}

TEST(Pipelines, Fig2ZeroNoiseClosure) {
  json doc = config::resolve(config::read_file(configs("noiseless.json")));
  const auto r = pipelines::run_fig2(config::from_json(doc), 4);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_NEAR(r.regression.gamma0, 600.0, 0.05);
  EXPECT_NEAR(r.regression.power_at_unity_c * 1e6, 22.8, 0.005);
  EXPECT_NEAR(r.g0, 6.08, 0.01);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("exit");
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 64);
  EXPECT_EQ(run("frobnicate"), 64);
  EXPECT_EQ(run("design --jobs 0"), 64);
  EXPECT_EQ(run("reproduce fig9 --out " + out.string()), 64);
  EXPECT_EQ(run("sweep --out " + out.string()), 64);
  EXPECT_EQ(run("sweep --grid nope=0:1:2 --out " + out.string()), 64);
  EXPECT_EQ(run("design --config " + (out / "missing.json").string()), 65);
  io::write_file(out / "bad.json", "{\"defaults\": \"paper\", \"bogus\": 1}");
  EXPECT_EQ(run("design --config " + (out / "bad.json").string()), 65);
  // Mirror radius shorter than the cavity: unstable optical resonator.
  io::write_file(out / "unstable.json", R"({"defaults": "paper", "optical_geometry": {"mirror_radius": 0.005}})");
  EXPECT_EQ(run("design --out " + out.string() + " --config " + (out / "unstable.json").string()), 2);
  EXPECT_EQ(run("design --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "design.json"));
  EXPECT_TRUE(fs::exists(out / "optical_modes.csv"));
  EXPECT_TRUE(fs::exists(out / "coupling_map.csv"));
}

TEST(Cli, SweepByteIdenticalAcrossJobs) {
  const auto a = scratch("sweep1"), b = scratch("sweep16");
  const std::string args = "sweep --config " + configs("alignment_sweep.json") +
                           " --grid design.alignment.transverse_offset=0:1e-5:41 --grid system_params.g0=5:7:3";
  ASSERT_EQ(run(args + " --jobs 1 --out " + a.string()), 0);
  ASSERT_EQ(run(args + " --jobs 16 --out " + b.string()), 0);
  const auto text = slurp(a / "sweep.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 124);
  EXPECT_EQ(text, slurp(b / "sweep.csv"));
}

TEST(Cli, ReproduceDeterministic) {
  const auto a = scratch("fig2a"), b = scratch("fig2b"), c = scratch("fig2c");
  ASSERT_EQ(run("reproduce fig2 --seed 5 --jobs 1 --out " + a.string()), 0);
  ASSERT_EQ(run("reproduce fig2 --seed 5 --jobs 8 --out " + b.string()), 0);
  ASSERT_EQ(run("reproduce fig2 --seed 6 --jobs 8 --out " + c.string()), 0);
  for (const char* f : {"fig2_traces.csv", "fig2_fits.csv", "fig2_summary.json", "manifest.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_NE(slurp(a / "fig2_traces.csv"), slurp(c / "fig2_traces.csv"));
  const auto manifest = json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["seed"].get<int>(), 5);
  EXPECT_EQ(manifest["status"].get<std::string>(), "ok");
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto env = scratch("env");
  const std::string cmd = "PHONON_LAB_OUT=" + env.string() + " " + PHONON_LAB_CLI + " design > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(env / "design.json"));
}
