// Command-line front end: simulate, sweeps, sampling studies, presets and the
// render hand-off manifest.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hgpdc/hgpdc.hpp"

namespace {

using hgpdc::json;

struct ConfigArgs {
  std::string file;
  std::string preset;
  std::vector<std::string> sets;
  std::optional<double> target_n;
  std::optional<double> gamma;
  std::optional<double> tau;
  std::optional<int> steps;
  std::string model;
  std::string out;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("config", a.file, "JSON config file (comments allowed)");
  cmd->add_option("-p,--preset", a.preset, "Start from a shipped preset");
  cmd->add_option("-s,--set", a.sets, "Override a config key: path.to.key=value")->take_all();
  cmd->add_option("--target-n", a.target_n, "Calibrate the gain to this photon number");
  cmd->add_option("--gamma", a.gamma, "Fixed parametric gain");
  cmd->add_option("--tau", a.tau, "Pump duration [fs]");
  cmd->add_option("--steps", a.steps, "Solver z-steps (0 = automatic)");
  cmd->add_option("--model", a.model, "rigorous, averaged or both");
  cmd->add_option("-o,--out", a.out, "Output directory (default: <root>/<command>-<hash>)");
}

json load_config(const ConfigArgs& a) {
  json j = a.file.empty() ? json{{"schema_version", hgpdc::kSchemaVersion}}
                          : hgpdc::read_json_file(a.file);
  if (!a.preset.empty()) j["preset"] = a.preset;
  j = hgpdc::expand_presets(j);
  for (const auto& s : a.sets) hgpdc::apply_override(j, s);
  if (a.target_n && a.gamma) throw hgpdc::ConfigError("--target-n and --gamma are exclusive");
  if (a.target_n) j["gain"] = {{"target_n", *a.target_n}};
  if (a.gamma) j["gain"] = {{"gamma", *a.gamma}};
  if (a.tau) j["pump"]["tau_fs"] = *a.tau;
  if (a.steps) j["solver"]["steps"] = *a.steps;
  if (!a.model.empty()) j["model"] = a.model;
  if (!a.out.empty()) j["outputs"]["directory"] = a.out;
  return j;
}

void report(const hgpdc::CommandResult& r) {
  std::cout << r.directory.string() << (r.reused ? " (reused)" : "") << "\n";
  std::cout << r.summary.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsed type-II PDC simulator"};
  app.set_version_flag("--version", std::string(HGPDC_VERSION));
  app.require_subcommand(1);

  hgpdc::RunOptions options;
  bool quiet = false;
  app.add_option("--output-root", options.output_root,
                 std::string("Root for generated run directories (env ") + hgpdc::kOutputRootEnv + ")");
  app.add_flag("--force", options.force, "Recompute even when an identical run exists");
  app.add_flag("-q,--quiet", quiet, "No progress lines on stderr");

  ConfigArgs sim_args, gain_args, pump_args, sample_args;
  std::vector<double> gain_photons, pump_photons, pump_taus;
  std::optional<int> gain_workers, pump_workers, sample_workers, sample_count;
  std::optional<std::uint64_t> sample_seed;

  auto* sim = app.add_subcommand("simulate", "Run one configuration at one gain");
  add_config_options(sim, sim_args);

  auto* sweep_gain = app.add_subcommand("sweep-gain", "Sweep the photon number");
  add_config_options(sweep_gain, gain_args);
  sweep_gain->add_option("--photons", gain_photons, "Target photon numbers (ascending)")->delimiter(',');
  sweep_gain->add_option("--workers", gain_workers, "Parallel points");

  auto* sweep_pump = app.add_subcommand("sweep-pump", "Sweep the pump duration and photon number");
  add_config_options(sweep_pump, pump_args);
  sweep_pump->add_option("--taus", pump_taus, "Pump durations [fs]")->delimiter(',');
  sweep_pump->add_option("--photons", pump_photons, "Target photon numbers (ascending)")->delimiter(',');
  sweep_pump->add_option("--workers", pump_workers, "Parallel points");

  auto* sample = app.add_subcommand("sample", "Random-waveguide ensemble study");
  add_config_options(sample, sample_args);
  sample->add_option("--count", sample_count, "Accepted samples");
  sample->add_option("--seed", sample_seed, "RNG seed");
  sample->add_option("--workers", sample_workers, "Parallel samples");

  auto* presets = app.add_subcommand("presets", "List or show shipped presets");
  presets->require_subcommand(1);
  auto* presets_list = presets->add_subcommand("list", "List preset names");
  std::string show_name;
  auto* presets_show = presets->add_subcommand("show", "Print a fully expanded preset");
  presets_show->add_option("name", show_name, "Preset name")->required();

  std::vector<std::string> handoff_dirs;
  std::string handoff_out;
  auto* handoff = app.add_subcommand("render-handoff", "Write a render manifest for run directories");
  handoff->add_option("runs", handoff_dirs, "Run directories (searched recursively)")->required();
  handoff->add_option("-o,--out", handoff_out, "Manifest path (default: <root>/render-manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hgpdc::ExitCode::config);
  }
  if (!quiet) options.log = &std::cerr;

  try {
    if (*sim) {
      const auto config = hgpdc::parse_config(load_config(sim_args));
      report(hgpdc::simulate(config, options));
    } else if (*sweep_gain) {
      json j = load_config(gain_args);
      if (!gain_photons.empty()) j["sweep"]["photons"] = gain_photons;
      if (gain_workers) j["sweep"]["workers"] = *gain_workers;
      j.erase("gain");
      report(hgpdc::sweep_gain(hgpdc::parse_config(j), options));
    } else if (*sweep_pump) {
      json j = load_config(pump_args);
      if (!pump_photons.empty()) j["sweep"]["photons"] = pump_photons;
      if (!pump_taus.empty()) j["sweep"]["tau_fs"] = pump_taus;
      if (pump_workers) j["sweep"]["workers"] = *pump_workers;
      j.erase("gain");
      report(hgpdc::sweep_pump(hgpdc::parse_config(j), options));
    } else if (*sample) {
      json j = load_config(sample_args);
      if (sample_count) j["sampling"]["count"] = *sample_count;
      if (sample_seed) j["sampling"]["seed"] = *sample_seed;
      if (sample_workers) j["sampling"]["workers"] = *sample_workers;
      report(hgpdc::sample(hgpdc::parse_config(j), options));
    } else if (*presets_list) {
      for (const auto& p : hgpdc::presets()) std::cout << p.name << "\t" << p.summary << "\n";
    } else if (*presets_show) {
      const auto config = hgpdc::parse_config(hgpdc::preset_json(show_name));
      std::cout << hgpdc::to_json(config).dump(2) << "\n";
    } else if (*handoff) {
      std::vector<hgpdc::fs::path> dirs(handoff_dirs.begin(), handoff_dirs.end());
      const hgpdc::fs::path out =
          handoff_out.empty() ? hgpdc::output_root(options) / "render-manifest.json"
                              : hgpdc::fs::path(handoff_out);
      std::cout << hgpdc::render_handoff(dirs, out).string() << "\n";
    }
  } catch (const hgpdc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(hgpdc::ExitCode::failure);
  }
  return 0;
}
