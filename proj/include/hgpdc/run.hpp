#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hgpdc/averaged.hpp"
#include "hgpdc/calibration.hpp"
#include "hgpdc/config.hpp"
#include "hgpdc/coupling.hpp"
#include "hgpdc/io.hpp"
#include "hgpdc/observables.hpp"
#include "hgpdc/parallel.hpp"
#include "hgpdc/presets.hpp"
#include "hgpdc/sampling.hpp"
#include "hgpdc/solver.hpp"

#ifndef HGPDC_VERSION
#define HGPDC_VERSION "0.0.0"
#endif

namespace hgpdc {

inline constexpr const char* kOutputRootEnv = "HGPDC_OUTPUT_ROOT";
inline constexpr const char* kPumpConvention =
    "S(Omega) = exp(-tau^2 Omega^2 / 2), Omega = Omega_s + Omega_i; "
    "amplitude FWHM = 2 sqrt(2 ln 2) / tau";

struct RunOptions {
  std::string output_root;  ///< empty: $HGPDC_OUTPUT_ROOT, then "hgpdc-runs"
  bool force = false;       ///< recompute even if an identical run exists
  std::ostream* log = nullptr;
};

inline fs::path output_root(const RunOptions& options) {
  if (!options.output_root.empty()) return options.output_root;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "hgpdc-runs";
}

/// First 12 hex digits of SHA-256 over the canonical config dump.
inline std::string config_hash(const json& resolved) {
  return sha256_hex(resolved.dump()).substr(0, 12);
}

inline fs::path run_directory(const RunConfig& config, const std::string& command,
                              const RunOptions& options) {
  if (!config.outputs.directory.empty()) return config.outputs.directory;
  return output_root(options) / (command + "-" + config_hash(to_json(config)));
}

/// Result of one model at one gain.
struct ModelRun {
  std::string model;
  double gain = 0.0;
  double target_photons = std::nan("");
  int steps = 0;  ///< 0 for the closed-form averaged model
  int calibration_evaluations = 0;
  BogoliubovTensors tensors;
  SpectralResult spectra;
  JsiResult jsi;
  std::optional<MetricsRecord> metrics;  ///< empty when the spectra vanish
  double commutator_residual = 0.0;
  std::optional<ConvergenceReport> convergence;
};

inline std::optional<MetricsRecord> safe_metrics(const SpectralResult& s) {
  try {
    return metrics(s);
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

inline void finish_run(ModelRun& run) {
  run.spectra = spectra(run.tensors);
  run.jsi = jsi(run.tensors);
  run.metrics = safe_metrics(run.spectra);
  run.commutator_residual = commutator_residual(run.tensors);
}

inline ModelRun run_rigorous(const CouplingField& field, const GainSpec& gain,
                             const SolverSettings& settings) {
  ModelRun run;
  run.model = "rigorous";
  run.steps = resolved_steps(settings, field);
  if (gain.target_photons) {
    run.target_photons = *gain.target_photons;
    GainCalibration cal = calibrate_gain(*gain.target_photons, field, settings);
    run.gain = cal.gain;
    run.calibration_evaluations = cal.evaluations + cal.coarse_evaluations;
    run.tensors = cal.tensors ? std::move(*cal.tensors) : propagate(field, cal.gain, settings);
  } else {
    run.gain = *gain.gamma;
    run.tensors = propagate(field, run.gain, settings);
  }
  if (settings.convergence_check) {
    CheckedPropagation checked = propagate_checked(field, run.gain, settings);
    run.convergence = checked.convergence;
  }
  finish_run(run);
  return run;
}

inline ModelRun run_averaged(const CouplingField& field, const GainSpec& gain,
                             const SchmidtModes& modes) {
  ModelRun run;
  run.model = "averaged";
  const double length = field.length();
  if (gain.target_photons) {
    run.target_photons = *gain.target_photons;
    run.gain = averaged_gain_for(modes, length, *gain.target_photons);
  } else {
    run.gain = *gain.gamma;
  }
  run.tensors = averaged_bogoliubov(modes, run.gain, length);
  finish_run(run);
  return run;
}

inline std::vector<std::string> model_names(ModelKind kind) {
  switch (kind) {
    case ModelKind::rigorous: return {"rigorous"};
    case ModelKind::averaged: return {"averaged"};
    case ModelKind::both: return {"rigorous", "averaged"};
  }
  return {"rigorous"};
}

/// Cached per-configuration state shared by every gain point.
struct Workspace {
  CouplingField field;
  std::optional<SchmidtModes> modes;

  Workspace(const FrequencyGrid& grid, const PumpParams& pump, Dispersion dispersion)
      : field(grid, pump, std::move(dispersion)) {}

  const SchmidtModes& schmidt() {
    if (!modes) modes = schmidt_decompose(tpa(field), field.grid());
    return *modes;
  }
};

inline ModelRun run_model(const std::string& model, Workspace& ws, const GainSpec& gain,
                          const SolverSettings& settings) {
  if (model == "averaged") return run_averaged(ws.field, gain, ws.schmidt());
  return run_rigorous(ws.field, gain, settings);
}

// --- serialization ---------------------------------------------------------

inline json to_json(const MetricsRecord& m) {
  return {{"rsd", json_number(m.rsd)},
          {"overlap", json_number(m.overlap)},
          {"fwhm_signal", json_number(m.fwhm_signal)},
          {"fwhm_idler", json_number(m.fwhm_idler)},
          {"mean_signal", json_number(m.mean_signal)},
          {"mean_idler", json_number(m.mean_idler)},
          {"sigma_signal", json_number(m.sigma_signal)},
          {"sigma_idler", json_number(m.sigma_idler)},
          {"trim_fraction", m.trim_fraction}};
}

inline json run_summary(const ModelRun& run) {
  json j{{"model", run.model},
         {"gain", run.gain},
         {"target_n", json_number(run.target_photons)},
         {"photons", run.spectra.photons},
         {"idler_photons", run.spectra.idler_photons},
         {"steps", run.steps},
         {"calibration_evaluations", run.calibration_evaluations},
         {"residuals",
          {{"commutator", run.commutator_residual},
           {"jsi_imaginary", run.jsi.imaginary_residual},
           {"pair_asymmetry", run.spectra.asymmetry}}},
         {"metrics", run.metrics ? to_json(*run.metrics) : json(nullptr)}};
  if (run.convergence)
    j["convergence"] = {{"photons", run.convergence->photons},
                        {"photons_refined", run.convergence->photons_refined},
                        {"relative_change", run.convergence->relative_change}};
  return j;
}

/// Writes spectra.csv, jsi.csv, jsi.bin, jsi.json and metrics.json.
inline void write_model_outputs(const fs::path& dir, const ModelRun& run, const OutputSpec& out) {
  const FrequencyGrid& grid = run.spectra.grid;
  write_file(dir / "spectra.csv", spectra_csv(grid, run.spectra.signal, run.spectra.idler));
  if (out.jsi_csv) write_file(dir / "jsi.csv", matrix_csv(grid, run.jsi.values));
  if (out.jsi_binary) {
    write_file(dir / "jsi.bin", matrix_bin(run.jsi.values));
    write_file(dir / "jsi.json",
               dump_json(matrix_bin_sidecar(grid, "jsi.bin", "joint spectral intensity",
                                            "photons / (rad/fs)^2")));
  }
  write_file(dir / "metrics.json", dump_json(run_summary(run)));
}

/// Zero-mismatch isoline points: sign changes of dk along rows and columns,
/// located by linear interpolation.
inline json pm0_isoline(const CouplingField& field) {
  const FrequencyGrid& g = field.grid();
  const Eigen::MatrixXd& dk = field.mismatch();
  json points = json::array();
  for (int j = 0; j < g.size; ++j) {
    for (int k = 0; k < g.size; ++k) {
      if (k + 1 < g.size && (dk(j, k) == 0.0 || dk(j, k) * dk(j, k + 1) < 0.0)) {
        const double t = dk(j, k) / (dk(j, k) - dk(j, k + 1));
        points.push_back({g.detuning(j), g.detuning(k) + t * g.step});
      }
      if (j + 1 < g.size && dk(j, k) * dk(j + 1, k) < 0.0) {
        const double t = dk(j, k) / (dk(j, k) - dk(j + 1, k));
        points.push_back({g.detuning(j) + t * g.step, g.detuning(k)});
      }
    }
  }
  return points;
}

/// deltak.csv and overlays.json consumed by the renderer.
inline void write_overlays(const fs::path& dir, const CouplingField& field) {
  const FrequencyGrid& g = field.grid();
  write_file(dir / "deltak.csv", matrix_csv(g, field.mismatch()));
  const double half = 0.5 * pump_amplitude_fwhm(field.pump());
  const double edge = 0.5 * g.span();
  json diagonals = json::array();
  for (double c : {-half, half}) {
    // Omega_s + Omega_i = c clipped to the grid square.
    const double lo = std::max(-edge, c - edge), hi = std::min(edge, c + edge);
    if (lo <= hi) diagonals.push_back({{lo, c - lo}, {hi, c - hi}});
  }
  json overlays{{"pump_convention", kPumpConvention},
                {"pump_amplitude_fwhm", pump_amplitude_fwhm(field.pump())},
                {"pump_fwhm_diagonals", diagonals},
                {"pm0_isoline", pm0_isoline(field)},
                {"deltak_file", "deltak.csv"},
                {"units", {{"detuning", "rad/fs"}, {"deltak", "1/mm"}}}};
  write_file(dir / "overlays.json", dump_json(overlays));
}

inline json dispersion_report(const CouplingField& field) {
  const TaylorDispersion t = taylor_parameters(field.dispersion());
  json j{{"taylor", to_json(t)}};
  try {
    const CharacteristicTimes times = characteristic_times(t);
    j["tau1_fs"] = times.tau1;
    j["tau2_fs"] = times.tau2;
    j["curvature_fs"] = times.curvature;
  } catch (const NumericError&) {
    j["tau1_fs"] = std::abs(t.alpha_s - t.alpha_i) * t.length_mm;
    j["tau2_fs"] = nullptr;
    j["curvature_fs"] = nullptr;
  }
  if (const auto* s = std::get_if<SellmeierDispersion>(&field.dispersion())) {
    j["k_qpm_per_mm"] = s->k_qpm();
    j["equivalent_poling_period_um"] = s->equivalent_poling_period_um();
    j["nominal_poling_period_um"] = s->nominal_poling_period_um();
    j["taylor_mode"] = s->taylor_mode();
  }
  return j;
}

inline json grid_report(const FrequencyGrid& g) {
  return {{"delta_omega", g.step},
          {"delta_nu_thz", g.step / (2.0 * std::numbers::pi) * 1e3},
          {"size", g.size},
          {"center_frequency", g.center},
          {"span", g.span()}};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Manifest written last, atomically, with the file inventory.
inline void write_manifest(const fs::path& dir, json manifest, double wall_clock_s) {
  manifest["schema_version"] = kSchemaVersion;
  manifest["code_version"] = HGPDC_VERSION;
  manifest["finished_utc"] = utc_timestamp();
  manifest["wall_clock_s"] = wall_clock_s;
  manifest["files"] = file_inventory(dir);
  write_file_atomic(dir / "manifest.json", dump_json(manifest));
}

/// True when `dir` already holds a finished run of the same config.
inline bool reusable(const fs::path& dir, const std::string& hash) {
  std::error_code ec;
  if (!fs::exists(dir / "manifest.json", ec)) return false;
  try {
    const json m = json::parse(read_file(dir / "manifest.json"));
    return m.value("config_hash", "") == hash;
  } catch (...) {
    return false;
  }
}

struct CommandResult {
  fs::path directory;
  bool reused = false;
  json summary;  ///< command-specific digest, also printed by the CLI
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline void log_line(const RunOptions& options, const std::string& line) {
  if (!options.log) return;
  static std::mutex m;
  const std::lock_guard lock(m);
  *options.log << line << std::endl;
}

inline json base_manifest(const std::string& command, const RunConfig& config) {
  const json resolved = to_json(config);
  return {{"command", command},
          {"config", resolved},
          {"config_hash", config_hash(resolved)},
          {"pump_convention", kPumpConvention},
          {"started_utc", utc_timestamp()}};
}

}  // namespace detail

// --- commands --------------------------------------------------------------

/// One configuration, one gain, one or both models.
inline CommandResult simulate(const RunConfig& config, const RunOptions& options = {}) {
  require_simulation(config);
  const auto t0 = detail::Clock::now();
  const fs::path dir = run_directory(config, "simulate", options);
  json manifest = detail::base_manifest("simulate", config);
  const std::string hash = manifest["config_hash"];
  if (!options.force && reusable(dir, hash)) {
    const json m = json::parse(read_file(dir / "manifest.json"));
    return {dir, true, m.value("models", json::object())};
  }

  Workspace ws(make_grid(config), *config.pump, make_dispersion(config));
  StagedDirectory stage(dir);
  const auto models = model_names(config.model);
  json runs = json::object();
  for (const auto& model : models) {
    detail::log_line(options, "simulate: " + model + " model");
    const ModelRun run = run_model(model, ws, *config.gain, config.solver);
    const fs::path sub = models.size() > 1 ? stage.path() / model : stage.path();
    write_model_outputs(sub, run, config.outputs);
    runs[model] = run_summary(run);
  }
  write_overlays(stage.path(), ws.field);
  manifest["grid"] = grid_report(ws.field.grid());
  manifest["dispersion"] = dispersion_report(ws.field);
  manifest["seeds"] = json::array();
  manifest["models"] = runs;
  write_manifest(stage.path(), manifest, detail::seconds_since(t0));
  stage.commit();
  return {dir, false, runs};
}

struct SweepPoint {
  double tau_fs = std::nan("");
  double target_photons = 0.0;
  std::string model;
  std::optional<ModelRun> run;
  std::string error;
};

inline std::string summary_header(bool with_tau) {
  return std::string(with_tau ? "tau_fs," : "") +
         "model,target_n,gain,photons,fwhm_s,fwhm_i,rsd,overlap,mean_s,mean_i,sigma_s,sigma_i,"
         "commutator,pair_asymmetry,status\n";
}

inline std::string summary_row(const SweepPoint& p, bool with_tau) {
  auto f = format_number;
  std::string row = with_tau ? f(p.tau_fs) + "," : "";
  row += p.model + ',' + f(p.target_photons) + ',';
  if (!p.run) {
    row += "nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,";
    std::string msg = p.error;
    for (char& c : msg)
      if (c == ',' || c == '\n') c = ';';
    return row + "error: " + msg + '\n';
  }
  const ModelRun& r = *p.run;
  const MetricsRecord m = r.metrics.value_or(
      MetricsRecord{std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan(""),
                    std::nan(""), std::nan(""), std::nan(""), kTrimFraction});
  row += f(r.gain) + ',' + f(r.spectra.photons) + ',' + f(m.fwhm_signal) + ',' +
         f(m.fwhm_idler) + ',' + f(m.rsd) + ',' + f(m.overlap) + ',' + f(m.mean_signal) + ',' +
         f(m.mean_idler) + ',' + f(m.sigma_signal) + ',' + f(m.sigma_idler) + ',' +
         f(r.commutator_residual) + ',' + f(r.spectra.asymmetry) + ",ok\n";
  return row;
}

inline std::string point_label(double target) { return "n" + format_number(target); }

/// Runs every (model, N) point of one configuration into `stage`/<prefix>.
inline void run_gain_points(Workspace& ws, const RunConfig& config,
                            const std::vector<double>& photons, const fs::path& root,
                            const std::string& prefix, const RunOptions& options,
                            std::vector<SweepPoint>& points) {
  const auto models = model_names(config.model);
  const std::size_t first = points.size();
  for (const auto& model : models)
    for (double n : photons) points.push_back({config.pump->duration_fs, n, model, {}, {}});
  if (std::any_of(models.begin(), models.end(), [](const auto& m) { return m == "averaged"; }))
    ws.schmidt();  // computed once, before workers share it
  parallel_for(points.size() - first, config.sweep.workers, [&](std::size_t i) {
    SweepPoint& p = points[first + i];
    try {
      GainSpec g;
      g.target_photons = p.target_photons;
      ModelRun run = run_model(p.model, ws, g, config.solver);
      fs::path sub = root / prefix / point_label(p.target_photons);
      if (models.size() > 1) sub /= p.model;
      write_file(sub / "spectra.csv", spectra_csv(run.spectra.grid, run.spectra.signal, run.spectra.idler));
      write_file(sub / "metrics.json", dump_json(run_summary(run)));
      detail::log_line(options, prefix + p.model + " N=" + format_number(p.target_photons) +
                                    " gain=" + format_number(run.gain) + " rsd=" +
                                    (run.metrics ? format_number(run.metrics->rsd) : "nan"));
      run.tensors = BogoliubovTensors{};
      run.jsi = JsiResult{};
      p.run = std::move(run);
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      p.error = e.what();
      detail::log_line(options, prefix + p.model + " N=" + format_number(p.target_photons) +
                                    " failed: " + e.what());
    }
  });
}

inline json sweep_digest(const std::vector<SweepPoint>& points) {
  json rows = json::array();
  for (const SweepPoint& p : points) {
    json r{{"model", p.model}, {"target_n", p.target_photons}, {"tau_fs", json_number(p.tau_fs)}};
    if (p.run) {
      r["gain"] = p.run->gain;
      r["photons"] = p.run->spectra.photons;
      r["metrics"] = p.run->metrics ? to_json(*p.run->metrics) : json(nullptr);
    } else {
      r["error"] = p.error;
    }
    rows.push_back(r);
  }
  return rows;
}

/// Gain sweep sharing the cached mismatch, pump and Schmidt data.
inline CommandResult sweep_gain(const RunConfig& config, const RunOptions& options = {}) {
  make_grid(config);
  make_dispersion(config);
  if (config.sweep.photons.empty()) throw ConfigError("sweep-gain needs sweep.photons");
  const auto t0 = detail::Clock::now();
  const fs::path dir = run_directory(config, "sweep-gain", options);
  json manifest = detail::base_manifest("sweep-gain", config);
  if (!options.force && reusable(dir, manifest["config_hash"])) {
    const json m = json::parse(read_file(dir / "manifest.json"));
    return {dir, true, m.value("points", json::array())};
  }

  Workspace ws(make_grid(config), *config.pump, make_dispersion(config));
  StagedDirectory stage(dir);
  std::vector<SweepPoint> points;
  run_gain_points(ws, config, config.sweep.photons, stage.path(), "", options, points);

  std::string csv = summary_header(false);
  for (const auto& p : points) csv += summary_row(p, false);
  write_file(stage.path() / "summary.csv", csv);
  write_overlays(stage.path(), ws.field);
  manifest["grid"] = grid_report(ws.field.grid());
  manifest["dispersion"] = dispersion_report(ws.field);
  manifest["seeds"] = json::array();
  manifest["points"] = sweep_digest(points);
  write_manifest(stage.path(), manifest, detail::seconds_since(t0));
  stage.commit();
  return {dir, false, sweep_digest(points)};
}

/// RSD(tau, N) table. A continuous-wave config runs a single pump setting.
inline CommandResult sweep_pump(const RunConfig& config, const RunOptions& options = {}) {
  make_grid(config);
  make_dispersion(config);
  if (config.sweep.photons.empty()) throw ConfigError("sweep-pump needs sweep.photons");
  std::vector<double> taus = config.sweep.tau_fs;
  if (config.pump->continuous_wave) taus = {config.pump->duration_fs};
  if (taus.empty()) throw ConfigError("sweep-pump needs sweep.tau_fs (or pump.cw = true)");
  const auto t0 = detail::Clock::now();
  const fs::path dir = run_directory(config, "sweep-pump", options);
  json manifest = detail::base_manifest("sweep-pump", config);
  if (!options.force && reusable(dir, manifest["config_hash"])) {
    const json m = json::parse(read_file(dir / "manifest.json"));
    return {dir, true, m.value("points", json::array())};
  }

  StagedDirectory stage(dir);
  std::vector<SweepPoint> points;
  for (double tau : taus) {
    RunConfig c = config;
    c.pump->duration_fs = tau;
    Workspace ws(make_grid(c), *c.pump, make_dispersion(c));
    const std::string prefix =
        config.pump->continuous_wave ? std::string("cw/") : "tau" + format_number(tau) + "/";
    run_gain_points(ws, c, config.sweep.photons, stage.path(), prefix, options, points);
  }
  std::string csv = summary_header(true);
  for (const auto& p : points) csv += summary_row(p, true);
  write_file(stage.path() / "summary.csv", csv);
  manifest["grid"] = grid_report(make_grid(config));
  manifest["seeds"] = json::array();
  manifest["points"] = sweep_digest(points);
  write_manifest(stage.path(), manifest, detail::seconds_since(t0));
  stage.commit();
  return {dir, false, sweep_digest(points)};
}

// --- sampling study --------------------------------------------------------

inline std::string samples_csv(const StudyResult& study, const SamplePlan& plan) {
  auto f = format_number;
  std::string out =
      "index,alpha_s,alpha_i,beta_p,beta_s,beta_i,tau1_fs,tau2_fs,curvature_fs,accepted,reason,"
      "lowgain_fwhm_s,lowgain_fwhm_i,lowgain_corr_sigma_s,lowgain_corr_sigma_i,lowgain_overlap,"
      "lowgain_rsd";
  for (double n : plan.gain_ladder) out += ",gain_n" + f(n) + ",photons_n" + f(n) + ",rsd_n" + f(n);
  out += '\n';
  for (const SampleRecord& r : study.records) {
    const TaylorDispersion& d = r.dispersion;
    const LowGainMetrics& m = r.low_gain;
    out += std::to_string(r.index) + ',' + f(d.alpha_s) + ',' + f(d.alpha_i) + ',' + f(d.beta_p) +
           ',' + f(d.beta_s) + ',' + f(d.beta_i) + ',' + f(r.times.tau1) + ',' + f(r.times.tau2) +
           ',' + f(r.times.curvature) + ',' + (r.accepted ? "1" : "0") + ',' + r.reason + ',' +
           f(m.fwhm_signal) + ',' + f(m.fwhm_idler) + ',' + f(m.correlation_sigma_signal) + ',' +
           f(m.correlation_sigma_idler) + ',' + f(m.overlap) + ',' + f(m.rsd);
    for (std::size_t g = 0; g < plan.gain_ladder.size(); ++g) {
      if (g < r.gains.size() && r.gains[g].ok())
        out += ',' + f(r.gains[g].gain) + ',' + f(r.gains[g].photons) + ',' +
               f(r.gains[g].metrics.rsd);
      else
        out += ",,,";
    }
    out += '\n';
  }
  return out;
}

inline std::string landscape_csv(const StudyResult& study) {
  std::string out = "index,tau1_over_tau,tau2_over_tau,rsd\n";
  for (const LandscapePoint& p : study.landscape)
    out += std::to_string(p.index) + ',' + format_number(p.tau1_ratio) + ',' +
           format_number(p.tau2_ratio) + ',' + format_number(p.rsd) + '\n';
  return out;
}

struct LandscapeTrends {
  double spearman_tau1_low = std::nan("");  ///< tau1/tau < 0.3: rank corr(tau1/tau, RSD)
  double spearman_tau2_high = std::nan(""); ///< tau1/tau > 1: rank corr(tau2/tau, RSD)
  int low_count = 0;
  int high_count = 0;
};

inline LandscapeTrends landscape_trends(const std::vector<LandscapePoint>& points) {
  std::vector<double> x1, y1, x2, y2;
  for (const auto& p : points) {
    if (!std::isfinite(p.rsd)) continue;
    if (p.tau1_ratio < 0.3) x1.push_back(p.tau1_ratio), y1.push_back(p.rsd);
    if (p.tau1_ratio > 1.0 && std::isfinite(p.tau2_ratio)) x2.push_back(p.tau2_ratio), y2.push_back(p.rsd);
  }
  return {spearman(x1, y1), spearman(x2, y2), static_cast<int>(x1.size()),
          static_cast<int>(x2.size())};
}

inline json study_digest(const StudyResult& study, const SamplePlan& plan) {
  double max_rsd = 0.0;
  int failures = 0;
  std::vector<int> above_half(plan.gain_ladder.size(), 0);
  for (const auto& r : study.records) {
    for (std::size_t g = 0; g < r.gains.size(); ++g) {
      if (!r.gains[g].ok()) {
        ++failures;
        continue;
      }
      max_rsd = std::max(max_rsd, r.gains[g].metrics.rsd);
      if (r.gains[g].metrics.rsd > 0.5) ++above_half[g];
    }
  }
  json rejected = json::object();
  for (const auto& r : study.records)
    if (!r.accepted) rejected[r.reason] = rejected.value(r.reason, 0) + 1;
  const LandscapeTrends t = landscape_trends(study.landscape);
  json per_gain = json::array();
  for (std::size_t g = 0; g < plan.gain_ladder.size(); ++g)
    per_gain.push_back({{"target_n", plan.gain_ladder[g]}, {"samples_rsd_above_0.5", above_half[g]}});
  return {{"screened", study.records.size()},
          {"accepted", study.accepted},
          {"rejected_by_reason", rejected},
          {"solver_failures", failures},
          {"max_rsd", max_rsd},
          {"per_gain", per_gain},
          {"landscape",
           {{"spearman_tau1_below_0.3", json_number(t.spearman_tau1_low)},
            {"count_tau1_below_0.3", t.low_count},
            {"spearman_tau2_tau1_above_1", json_number(t.spearman_tau2_high)},
            {"count_tau1_above_1", t.high_count}}}};
}

inline CommandResult sample(const RunConfig& config, const RunOptions& options = {}) {
  if (!config.sampling) throw ConfigError("sample needs a 'sampling' section");
  const SamplePlan& plan = *config.sampling;
  const auto t0 = detail::Clock::now();
  const fs::path dir = run_directory(config, "sample", options);
  json manifest = detail::base_manifest("sample", config);
  if (!options.force && reusable(dir, manifest["config_hash"])) {
    const json m = json::parse(read_file(dir / "manifest.json"));
    return {dir, true, m.value("study", json::object())};
  }

  StagedDirectory stage(dir);
  std::size_t done = 0;
  const StudyResult study = run_study(plan, [&](const SampleRecord& r) {
    std::string line = "sample " + std::to_string(++done) + "/" + std::to_string(plan.count) +
                       " (draw " + std::to_string(r.index) + ")";
    for (const auto& g : r.gains)
      line += " N=" + format_number(g.target_photons) + ":" +
              (g.ok() ? format_number(g.metrics.rsd) : std::string("fail"));
    detail::log_line(options, line);
  });
  write_file(stage.path() / "samples.csv", samples_csv(study, plan));
  write_file(stage.path() / "landscape.csv", landscape_csv(study));
  const json digest = study_digest(study, plan);
  write_file(stage.path() / "summary.json", dump_json(digest));
  manifest["grid"] = grid_report(plan_grid(plan));
  manifest["seeds"] = {plan.seed};
  manifest["rng"] = "counter-based SplitMix64 (seed, draw index, parameter index)";
  manifest["study"] = digest;
  write_manifest(stage.path(), manifest, detail::seconds_since(t0));
  stage.commit();
  return {dir, false, digest};
}

// --- render hand-off -------------------------------------------------------

namespace detail {

inline std::string rel(const fs::path& file, const fs::path& base) {
  return fs::relative(fs::absolute(file), fs::absolute(base)).generic_string();
}

inline void add_run_entries(const fs::path& run, const json& manifest, const fs::path& base,
                            json& entries) {
  const std::string command = manifest.value("command", "");
  const std::string label = manifest.value("config", json::object()).value("preset", run.filename().string());
  const fs::path deltak = run / "deltak.csv";
  const fs::path overlays = run / "overlays.json";
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(run))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    const std::string where = rel(file.parent_path(), run);
    const std::string title = label + (where == "." ? "" : " " + where);
    if (name == "jsi.csv") {
      json e{{"kind", "jsi"},
             {"title", title},
             {"data", rel(file, base)},
             {"schema", "matrix_csv"},
             {"axes", {{"x", "Omega_i [rad/fs]"}, {"y", "Omega_s [rad/fs]"}, {"value", "Normalized JSI"}}}};
      if (fs::exists(deltak)) e["deltak"] = rel(deltak, base);
      if (fs::exists(overlays)) e["overlays"] = rel(overlays, base);
      if (fs::exists(file.parent_path() / "jsi.json"))
        e["binary_sidecar"] = rel(file.parent_path() / "jsi.json", base);
      entries.push_back(e);
    } else if (name == "spectra.csv") {
      entries.push_back({{"kind", "spectra"},
                         {"title", title},
                         {"data", rel(file, base)},
                         {"schema", "spectra_csv"},
                         {"columns", {"omega", "Omega", "n_s", "n_i"}},
                         {"axes", {{"x", "Omega [rad/fs]"}, {"y", "n_s, n_i [1/(rad/fs)]"}}}});
    } else if (name == "summary.csv" && (command == "sweep-gain" || command == "sweep-pump")) {
      const bool by_tau = command == "sweep-pump";
      json common{{"title", label},
                  {"data", rel(file, base)},
                  {"schema", by_tau ? "sweep_pump_summary_csv" : "sweep_gain_summary_csv"},
                  {"x", by_tau ? "tau_fs" : "target_n"},
                  {"series", by_tau ? json({"model", "target_n"}) : json({"model"})},
                  {"log_x", !by_tau}};
      json rsd = common;
      rsd["kind"] = "rsd_curve";
      rsd["y"] = {"rsd"};
      rsd["axes"] = {{"x", by_tau ? "tau [fs]" : "N"}, {"y", "RSD"}};
      entries.push_back(rsd);
      if (!by_tau) {
        json fw = common;
        fw["kind"] = "fwhm_curve";
        fw["y"] = {"fwhm_s", "fwhm_i"};
        fw["axes"] = {{"x", "N"}, {"y", "FWHM [rad/fs]"}};
        entries.push_back(fw);
      }
    } else if (name == "landscape.csv") {
      entries.push_back({{"kind", "landscape"},
                         {"title", label},
                         {"data", rel(file, base)},
                         {"schema", "landscape_csv"},
                         {"columns", {"index", "tau1_over_tau", "tau2_over_tau", "rsd"}},
                         {"axes", {{"x", "tau1 / tau"}, {"y", "tau2 / tau"}, {"value", "RSD"}}}});
    }
  }
}

}  // namespace detail

/// Lists every plottable file under the given run directories.
inline json render_manifest(const std::vector<fs::path>& runs, const fs::path& manifest_dir) {
  json entries = json::array();
  for (const fs::path& run : runs) {
    std::vector<fs::path> found;
    if (fs::exists(run / "manifest.json")) {
      found.push_back(run);
    } else if (fs::is_directory(run)) {
      for (const auto& e : fs::recursive_directory_iterator(run))
        if (e.is_regular_file() && e.path().filename() == "manifest.json")
          found.push_back(e.path().parent_path());
      std::sort(found.begin(), found.end());
    }
    if (found.empty()) throw IoError("no run manifest found under '" + run.string() + "'");
    for (const fs::path& dir : found) {
      const json m = json::parse(read_file(dir / "manifest.json"));
      detail::add_run_entries(dir, m, manifest_dir, entries);
    }
  }
  return {{"schema_version", kSchemaVersion}, {"entries", entries}};
}

inline fs::path render_handoff(const std::vector<fs::path>& runs, const fs::path& out_file) {
  const fs::path base = out_file.has_parent_path() ? out_file.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(base, ec);
  write_file_atomic(out_file, dump_json(render_manifest(runs, base)));
  return out_file;
}

}  // namespace hgpdc
