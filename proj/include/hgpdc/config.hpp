#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hgpdc/dispersion.hpp"
#include "hgpdc/errors.hpp"
#include "hgpdc/grid.hpp"
#include "hgpdc/sampling.hpp"
#include "hgpdc/solver.hpp"

namespace hgpdc {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class ModelKind { rigorous, averaged, both };

inline std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::rigorous: return "rigorous";
    case ModelKind::averaged: return "averaged";
    case ModelKind::both: return "both";
  }
  return "rigorous";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "rigorous") return ModelKind::rigorous;
  if (s == "averaged") return ModelKind::averaged;
  if (s == "both") return ModelKind::both;
  throw ConfigError("model must be rigorous, averaged or both (got '" + s + "')");
}

struct GridSpec {
  double delta_omega = 0.0;  ///< rad/fs
  int size = 0;
};

struct DispersionSpec {
  enum class Kind { taylor, sellmeier } kind = Kind::taylor;
  TaylorDispersion taylor{};
  std::string crystal = "ppktp";
  double length_mm = 1.0;
  bool taylor_mode = false;
  double poling_period_um = 10.8;
};

/// Exactly one member is set.
struct GainSpec {
  std::optional<double> gamma;
  std::optional<double> target_photons;
};

struct OutputSpec {
  std::string directory;  ///< empty: <root>/<command>-<config hash>
  bool jsi_csv = true;
  bool jsi_binary = true;
};

struct SweepSpec {
  std::vector<double> photons;
  std::vector<double> tau_fs;
  int workers = 1;
};

struct RunConfig {
  ModelKind model = ModelKind::rigorous;
  std::optional<GridSpec> grid;
  std::optional<PumpParams> pump;
  std::optional<DispersionSpec> dispersion;
  std::optional<GainSpec> gain;
  SolverSettings solver{};
  OutputSpec outputs{};
  SweepSpec sweep{};
  std::optional<SamplePlan> sampling;
  std::string preset;  ///< informational: the preset the config was built from
};

namespace detail {

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ConfigError("missing required key '" + where + "." + key + "'");
  return obj.at(key);
}

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + where + "." + key + "'");
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("'" + where + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + where + "' must be finite");
  return x;
}

inline int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError("'" + where + "' must be an integer");
  return v.get<int>();
}

inline bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError("'" + where + "' must be true or false");
  return v.get<bool>();
}

inline std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError("'" + where + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(number(e, where));
  return out;
}

inline Range range(const json& v, const std::string& where) {
  const auto r = numbers(v, where);
  if (r.size() != 2 || r[0] > r[1]) throw ConfigError("'" + where + "' must be [lo, hi]");
  return {r[0], r[1]};
}

inline double opt_number(const json& obj, const char* key, double fallback,
                         const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

}  // namespace detail

inline GridSpec parse_grid(const json& j) {
  detail::check_keys(j, {"delta_omega", "size"}, "grid");
  GridSpec g{detail::number(detail::require(j, "delta_omega", "grid"), "grid.delta_omega"),
             detail::integer(detail::require(j, "size", "grid"), "grid.size")};
  build_grid(0.775, g.delta_omega, g.size);  // shape checks only
  return g;
}

inline PumpParams parse_pump(const json& j) {
  detail::check_keys(j, {"lambda_p_um", "tau_fs", "cw"}, "pump");
  PumpParams p;
  p.wavelength_um = detail::number(detail::require(j, "lambda_p_um", "pump"), "pump.lambda_p_um");
  p.duration_fs = detail::number(detail::require(j, "tau_fs", "pump"), "pump.tau_fs");
  p.continuous_wave = j.contains("cw") && detail::boolean(j.at("cw"), "pump.cw");
  validate(p);
  return p;
}

inline DispersionSpec parse_dispersion(const json& j) {
  DispersionSpec d;
  const json& type = detail::require(j, "type", "dispersion");
  if (type == "taylor") {
    detail::check_keys(j, {"type", "alpha_s", "alpha_i", "beta_p", "beta_s", "beta_i", "length_mm"},
                       "dispersion");
    auto field = [&](const char* key) {
      return detail::number(detail::require(j, key, "dispersion"), std::string("dispersion.") + key);
    };
    d.kind = DispersionSpec::Kind::taylor;
    d.taylor = {field("alpha_s"), field("alpha_i"), field("beta_p"),
                field("beta_s"),  field("beta_i"),  field("length_mm")};
    validate(d.taylor);
    d.length_mm = d.taylor.length_mm;
  } else if (type == "sellmeier") {
    detail::check_keys(j, {"type", "crystal", "length_mm", "taylor_mode", "poling_period_um"},
                       "dispersion");
    d.kind = DispersionSpec::Kind::sellmeier;
    if (j.contains("crystal")) {
      if (!j.at("crystal").is_string()) throw ConfigError("'dispersion.crystal' must be a string");
      d.crystal = j.at("crystal").get<std::string>();
    }
    if (d.crystal != "ppktp")
      throw ConfigError("unsupported crystal '" + d.crystal + "' (available: ppktp)");
    d.length_mm = detail::number(detail::require(j, "length_mm", "dispersion"), "dispersion.length_mm");
    if (!(d.length_mm > 0.0)) throw ConfigError("dispersion.length_mm must be positive");
    d.taylor_mode = j.contains("taylor_mode") && detail::boolean(j.at("taylor_mode"), "dispersion.taylor_mode");
    d.poling_period_um = detail::opt_number(j, "poling_period_um", 10.8, "dispersion");
  } else {
    throw ConfigError("dispersion.type must be 'taylor' or 'sellmeier'");
  }
  return d;
}

inline GainSpec parse_gain(const json& j) {
  detail::check_keys(j, {"gamma", "target_n"}, "gain");
  GainSpec g;
  if (j.contains("gamma") && !j.at("gamma").is_null())
    g.gamma = detail::number(j.at("gamma"), "gain.gamma");
  if (j.contains("target_n") && !j.at("target_n").is_null())
    g.target_photons = detail::number(j.at("target_n"), "gain.target_n");
  if (g.gamma.has_value() == g.target_photons.has_value())
    throw ConfigError("gain needs exactly one of 'gamma' or 'target_n'");
  if (g.gamma && *g.gamma < 0.0) throw ConfigError("gain.gamma must be non-negative");
  if (g.target_photons && !(*g.target_photons > 0.0))
    throw ConfigError("gain.target_n must be positive");
  return g;
}

inline SolverSettings parse_solver(const json& j) {
  detail::check_keys(j, {"steps", "convergence_check", "deterministic"}, "solver");
  SolverSettings s;
  if (j.contains("steps")) s.steps = detail::integer(j.at("steps"), "solver.steps");
  if (s.steps != 0) checked_steps(s.steps);
  if (j.contains("convergence_check"))
    s.convergence_check = detail::boolean(j.at("convergence_check"), "solver.convergence_check");
  if (j.contains("deterministic"))
    s.deterministic = detail::boolean(j.at("deterministic"), "solver.deterministic");
  return s;
}

inline OutputSpec parse_outputs(const json& j) {
  detail::check_keys(j, {"directory", "jsi_csv", "jsi_binary"}, "outputs");
  OutputSpec o;
  if (j.contains("directory")) {
    if (!j.at("directory").is_string()) throw ConfigError("'outputs.directory' must be a string");
    o.directory = j.at("directory").get<std::string>();
  }
  if (j.contains("jsi_csv")) o.jsi_csv = detail::boolean(j.at("jsi_csv"), "outputs.jsi_csv");
  if (j.contains("jsi_binary")) o.jsi_binary = detail::boolean(j.at("jsi_binary"), "outputs.jsi_binary");
  return o;
}

inline SweepSpec parse_sweep(const json& j) {
  detail::check_keys(j, {"photons", "tau_fs", "workers"}, "sweep");
  SweepSpec s;
  if (j.contains("photons")) s.photons = detail::numbers(j.at("photons"), "sweep.photons");
  if (j.contains("tau_fs")) s.tau_fs = detail::numbers(j.at("tau_fs"), "sweep.tau_fs");
  if (j.contains("workers")) s.workers = detail::integer(j.at("workers"), "sweep.workers");
  if (s.workers < 1) throw ConfigError("sweep.workers must be at least 1");
  for (double n : s.photons)
    if (!(n > 0.0)) throw ConfigError("sweep.photons entries must be positive");
  if (!std::is_sorted(s.photons.begin(), s.photons.end()))
    throw ConfigError("sweep.photons must be ascending");
  for (double t : s.tau_fs)
    if (!(t > 0.0)) throw ConfigError("sweep.tau_fs entries must be positive");
  return s;
}

/// Sampling section. Grid and pump come from the top-level sections when
/// present, so a plan reads like any other run config.
inline SamplePlan parse_sampling(const json& j, const std::optional<GridSpec>& grid,
                                 const std::optional<PumpParams>& pump) {
  detail::check_keys(j,
                     {"seed", "count", "max_candidates", "alpha_range", "beta_range", "beta_zero",
                      "length_mm", "fwhm_min_steps", "fwhm_max_fraction", "correlation_min_steps",
                      "correlation_max_fraction", "overlap_min", "rsd_max", "gain_ladder",
                      "landscape_n", "workers"},
                     "sampling");
  SamplePlan p;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw ConfigError("'sampling.seed' must be a non-negative integer");
    p.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("count")) p.count = detail::integer(j.at("count"), "sampling.count");
  if (j.contains("max_candidates"))
    p.max_candidates = detail::integer(j.at("max_candidates"), "sampling.max_candidates");
  if (j.contains("alpha_range")) p.alpha_range = detail::range(j.at("alpha_range"), "sampling.alpha_range");
  if (j.contains("beta_range")) p.beta_range = detail::range(j.at("beta_range"), "sampling.beta_range");
  if (j.contains("beta_zero")) p.beta_zero = detail::boolean(j.at("beta_zero"), "sampling.beta_zero");
  p.length_mm = detail::opt_number(j, "length_mm", p.length_mm, "sampling");
  p.fwhm_min_steps = detail::opt_number(j, "fwhm_min_steps", p.fwhm_min_steps, "sampling");
  p.fwhm_max_fraction = detail::opt_number(j, "fwhm_max_fraction", p.fwhm_max_fraction, "sampling");
  p.correlation_min_steps =
      detail::opt_number(j, "correlation_min_steps", p.correlation_min_steps, "sampling");
  p.correlation_max_fraction =
      detail::opt_number(j, "correlation_max_fraction", p.correlation_max_fraction, "sampling");
  p.overlap_min = detail::opt_number(j, "overlap_min", p.overlap_min, "sampling");
  p.rsd_max = detail::opt_number(j, "rsd_max", p.rsd_max, "sampling");
  if (j.contains("gain_ladder")) p.gain_ladder = detail::numbers(j.at("gain_ladder"), "sampling.gain_ladder");
  p.landscape_photons = detail::opt_number(j, "landscape_n", p.landscape_photons, "sampling");
  if (j.contains("workers")) p.workers = detail::integer(j.at("workers"), "sampling.workers");
  if (grid) {
    p.grid_step = grid->delta_omega;
    p.grid_size = grid->size;
  }
  if (pump) {
    if (pump->continuous_wave) throw ConfigError("sampling requires a pulsed pump");
    p.pump_wavelength_um = pump->wavelength_um;
    p.pump_duration_fs = pump->duration_fs;
  }
  validate(p);
  return p;
}

inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::check_keys(j,
                     {"schema_version", "preset", "model", "grid", "pump", "dispersion", "gain",
                      "solver", "outputs", "sweep", "sampling"},
                     "config");
  const int version = detail::integer(detail::require(j, "schema_version", "config"), "schema_version");
  if (version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  RunConfig c;
  if (j.contains("preset") && j.at("preset").is_string()) c.preset = j.at("preset").get<std::string>();
  if (j.contains("model")) {
    if (!j.at("model").is_string()) throw ConfigError("'model' must be a string");
    c.model = parse_model(j.at("model").get<std::string>());
  }
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
  if (j.contains("pump")) c.pump = parse_pump(j.at("pump"));
  if (j.contains("dispersion")) c.dispersion = parse_dispersion(j.at("dispersion"));
  if (j.contains("gain")) c.gain = parse_gain(j.at("gain"));
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  if (j.contains("outputs")) c.outputs = parse_outputs(j.at("outputs"));
  if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"));
  if (j.contains("sampling")) c.sampling = parse_sampling(j.at("sampling"), c.grid, c.pump);
  return c;
}

inline json to_json(const TaylorDispersion& d) {
  return {{"type", "taylor"},   {"alpha_s", d.alpha_s}, {"alpha_i", d.alpha_i},
          {"beta_p", d.beta_p}, {"beta_s", d.beta_s},   {"beta_i", d.beta_i},
          {"length_mm", d.length_mm}};
}

inline json to_json(const SamplePlan& p) {
  return {{"seed", p.seed},
          {"count", p.count},
          {"max_candidates", p.max_candidates},
          {"alpha_range", {p.alpha_range.lo, p.alpha_range.hi}},
          {"beta_range", {p.beta_range.lo, p.beta_range.hi}},
          {"beta_zero", p.beta_zero},
          {"length_mm", p.length_mm},
          {"fwhm_min_steps", p.fwhm_min_steps},
          {"fwhm_max_fraction", p.fwhm_max_fraction},
          {"correlation_min_steps", p.correlation_min_steps},
          {"correlation_max_fraction", p.correlation_max_fraction},
          {"overlap_min", p.overlap_min},
          {"rsd_max", p.rsd_max},
          {"gain_ladder", p.gain_ladder},
          {"landscape_n", p.landscape_photons},
          {"workers", p.workers}};
}

/// Canonical form: every default spelled out, keys sorted. Equal configs give
/// byte-equal dumps, which is what the output directory hash relies on.
inline json to_json(const RunConfig& c) {
  json j{{"schema_version", kSchemaVersion}, {"model", to_string(c.model)}};
  if (!c.preset.empty()) j["preset"] = c.preset;
  if (c.grid) j["grid"] = {{"delta_omega", c.grid->delta_omega}, {"size", c.grid->size}};
  if (c.pump)
    j["pump"] = {{"lambda_p_um", c.pump->wavelength_um},
                 {"tau_fs", c.pump->duration_fs},
                 {"cw", c.pump->continuous_wave}};
  if (c.dispersion) {
    const DispersionSpec& d = *c.dispersion;
    if (d.kind == DispersionSpec::Kind::taylor)
      j["dispersion"] = to_json(d.taylor);
    else
      j["dispersion"] = {{"type", "sellmeier"},
                         {"crystal", d.crystal},
                         {"length_mm", d.length_mm},
                         {"taylor_mode", d.taylor_mode},
                         {"poling_period_um", d.poling_period_um}};
  }
  if (c.gain) {
    if (c.gain->gamma)
      j["gain"] = {{"gamma", *c.gain->gamma}};
    else
      j["gain"] = {{"target_n", *c.gain->target_photons}};
  }
  j["solver"] = {{"steps", c.solver.steps},
                 {"convergence_check", c.solver.convergence_check},
                 {"deterministic", c.solver.deterministic}};
  j["outputs"] = {{"directory", c.outputs.directory},
                  {"jsi_csv", c.outputs.jsi_csv},
                  {"jsi_binary", c.outputs.jsi_binary}};
  if (!c.sweep.photons.empty() || !c.sweep.tau_fs.empty() || c.sweep.workers != 1)
    j["sweep"] = {{"photons", c.sweep.photons},
                  {"tau_fs", c.sweep.tau_fs},
                  {"workers", c.sweep.workers}};
  if (c.sampling) j["sampling"] = to_json(*c.sampling);
  return j;
}

inline FrequencyGrid make_grid(const RunConfig& c) {
  if (!c.grid) throw ConfigError("missing required section 'grid'");
  if (!c.pump) throw ConfigError("missing required section 'pump'");
  return build_grid(c.pump->wavelength_um, c.grid->delta_omega, c.grid->size);
}

inline Dispersion make_dispersion(const RunConfig& c) {
  if (!c.dispersion) throw ConfigError("missing required section 'dispersion'");
  const DispersionSpec& d = *c.dispersion;
  if (d.kind == DispersionSpec::Kind::taylor) return d.taylor;
  const double lambda = c.pump ? c.pump->wavelength_um : 0.775;
  return SellmeierDispersion(kKtpGamma, kKtpBeta, kKtpGamma, lambda, d.length_mm,
                             d.poling_period_um, d.taylor_mode);
}

/// Checks that everything a single simulation needs is present.
inline void require_simulation(const RunConfig& c) {
  make_grid(c);
  make_dispersion(c);
  if (!c.gain) throw ConfigError("missing required section 'gain'");
}

/// Like RFC 7396 merge-patch, except that "gain" and "dispersion" objects
/// replace the base wholesale: their alternatives are mutually exclusive.
inline void merge_config(json& base, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_null()) {
      base.erase(key);
    } else if ((key == "gain" || key == "dispersion") || !value.is_object() ||
               !base.contains(key) || !base.at(key).is_object()) {
      base[key] = value;
    } else {
      merge_config(base[key], value);
    }
  }
}

/// Sets a dotted key path ("pump.tau_fs") to `value`, parsed as JSON when
/// possible and kept as a string otherwise.
inline void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value (got '" + assignment + "')");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::stringstream parts(path);
  std::string part;
  std::vector<std::string> keys;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw ConfigError("empty component in override key '" + path + "'");
    keys.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    json& next = (*node)[keys[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("override key '" + path + "' crosses a non-object");
    node = &next;
  }
  if (keys.front() == "gain" && keys.size() == 2) node->clear();
  (*node)[keys.back()] = value;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path);
}

}  // namespace hgpdc
