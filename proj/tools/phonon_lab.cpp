// phonon-lab: design report, figure reproduction and parameter sweeps.
//
//   phonon-lab design            [--config PATH] [--out DIR] [--jobs N]
//   phonon-lab reproduce fig2|fig3 [--config PATH] [--seed N] [--out DIR] [--jobs N]
//   phonon-lab sweep --grid path=start:stop:count [...] [--config PATH] [--out DIR] [--jobs N]
//
// Without --config the built-in "paper" preset is used. PHONON_LAB_OUT sets the
// output directory unless --out is given.
//
// Exit codes: 0 success, 2 physics failure, 64 usage, 65 config.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phonon_lab/phonon_lab.hpp"

namespace {

using namespace phonon_lab;
using config::json;

constexpr int exit_ok = 0;
constexpr int exit_physics = 2;
constexpr int exit_usage = 64;
constexpr int exit_config = 65;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
  std::string figure;
  std::vector<std::string> grid;
};

json load_document(const Options& o) {
  json doc = o.config_path.empty() ? config::paper_preset() : config::resolve(config::read_file(o.config_path));
  if (o.seed) {
    if (!doc.contains("synth") || !doc["synth"].is_object()) throw ConfigError("synth", "missing required key");
    doc["synth"]["seed"] = *o.seed;
  }
  return doc;
}

std::filesystem::path output_dir(const Options& o, const config::ScenarioConfig& c) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("PHONON_LAB_OUT"); env && *env) return env;
  return c.output_dir;
}

void write_all(const std::filesystem::path& dir, const pipelines::FileSet& files) {
  for (const auto& [name, contents] : files.files) io::write_file(dir / name, contents);
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const config::ScenarioConfig& c,
                    const pipelines::FileSet& files, const std::string& error) {
  json names = json::array();
  for (const auto& f : files.files) names.push_back(f.first);
  const json manifest = {{"command", command},
                         {"seed", c.seed},
                         {"status", error.empty() ? "ok" : "failed"},
                         {"error", error},
                         {"files", names}};
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

int cmd_design(const Options& o) {
  const auto c = config::from_json(load_document(o));
  const auto report = pipelines::design(c, o.jobs);
  const auto files = pipelines::design_files(report);
  const auto dir = output_dir(o, c);
  write_all(dir, files);
  std::cout << *files.find("design.json");
  return exit_ok;
}

int cmd_reproduce(const Options& o) {
  if (o.figure != "fig2" && o.figure != "fig3") {
    throw UsageError("unknown figure '" + o.figure + "' (expected fig2 or fig3)");
  }
  const auto c = config::from_json(load_document(o));
  const auto dir = output_dir(o, c);
  pipelines::FileSet files;
  std::string error;
  if (o.figure == "fig2") {
    const auto r = pipelines::run_fig2(c, o.jobs);
    files = pipelines::fig2_files(r);
    error = r.error;
    if (error.empty()) {
      std::cout << "gamma0_Hz " << io::format_number(r.regression.gamma0) << "\n"
                << "power_at_unity_c_W " << io::format_number(r.regression.power_at_unity_c) << "\n"
                << "g0_Hz " << io::format_number(r.g0) << "\n";
    }
  } else {
    try {
      const auto r = pipelines::run_fig3(c, o.jobs);
      files = pipelines::fig3_files(r);
      const auto& last = pipelines::highest_power_point(r);
      if (!last.ok) error = "final point failed: " + last.error;
      std::cout << "power_W " << io::format_number(last.transmitted_power) << "\n"
                << "occupation_from_linewidth " << io::format_number(last.occupation_from_linewidth) << "\n"
                << "occupation_from_area " << io::format_number(last.occupation_from_area) << "\n";
    } catch (const PhysicsError& e) {
      error = e.what();
    }
  }
  write_all(dir, files);
  write_manifest(dir, "reproduce " + o.figure, c, files, error);
  if (!error.empty()) {
    std::cerr << "phonon-lab: " << error << "\n";
    return exit_physics;
  }
  return exit_ok;
}

int cmd_sweep(const Options& o) {
  if (o.grid.empty()) throw UsageError("sweep needs at least one --grid axis");
  std::vector<pipelines::SweepAxis> axes;
  for (const auto& spec : o.grid) axes.push_back(pipelines::parse_axis(spec));
  const auto doc = load_document(o);
  const auto c = config::from_json(doc);
  const auto rows = pipelines::sweep(doc, axes, o.jobs);
  const auto csv = pipelines::sweep_csv(axes, rows);
  io::write_file(output_dir(o, c) / "sweep.csv", csv);
  std::cout << csv;
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triply-resonant Brillouin optomechanics simulator"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "scenario JSON (default: built-in \"paper\" preset)");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output directory");
  };
  auto* design = app.add_subcommand("design", "optical/acoustic design report");
  add_common(design);
  auto* reproduce = app.add_subcommand("reproduce", "synthesize and analyze a figure data set");
  add_common(reproduce);
  reproduce->add_option("figure", o.figure, "fig2 or fig3")->required();
  reproduce->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { o.seed = s; }, "noise seed");
  auto* sweep = app.add_subcommand("sweep", "parallel parameter sweep");
  add_common(sweep);
  sweep->add_option("--grid", o.grid, "axis as dotted.path=start:stop:count (repeatable)");
  sweep->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { o.seed = s; }, "noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (design->parsed()) return cmd_design(o);
    if (reproduce->parsed()) return cmd_reproduce(o);
    return cmd_sweep(o);
  } catch (const UsageError& e) {
    std::cerr << "phonon-lab: " << e.what() << "\n";
    return exit_usage;
  } catch (const ConfigError& e) {
    std::cerr << "phonon-lab: " << e.what() << "\n";
    return exit_config;
  } catch (const PhysicsError& e) {
    std::cerr << "phonon-lab: " << e.what() << "\n";
    return exit_physics;
  } catch (const std::exception& e) {
    std::cerr << "phonon-lab: " << e.what() << "\n";
    return 1;
  }
}
