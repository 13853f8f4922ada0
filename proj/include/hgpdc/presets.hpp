#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hgpdc/config.hpp"

namespace hgpdc {

struct Preset {
  std::string_view name;
  std::string_view summary;
  std::string_view text;  ///< JSON with comments
};

// Shared grid: delta_omega = 2 pi * 0.36 THz = 0.0022619467105846514 rad/fs
// with 255 points, pump at 0.775 um, 80 fs, 10 mm waveguides.

inline constexpr std::string_view kWaveguideBase = R"({
  "schema_version": 1,
  "model": "rigorous",
  // 2 pi * 0.36e-3 rad/fs
  "grid": {"delta_omega": 0.0022619467105846514, "size": 255},
  "pump": {"lambda_p_um": 0.775, "tau_fs": 80, "cw": false}
})";

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> table{
      {"waveguide-base", "shared grid and 80 fs pump for the waveguide presets", kWaveguideBase},
      // WG0: group-velocity terms only (tau1 = 100 fs, tau2 = 0).
      {"wg0-lowgain", "WG0, no second-order dispersion, N = 1e-5", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "dispersion": {"type": "taylor", "alpha_s": 30, "alpha_i": 20,
                 "beta_p": 0, "beta_s": 0, "beta_i": 0, "length_mm": 10},
  "gain": {"target_n": 1e-5}
})"},
      {"wg0-highgain", "WG0 at N = 1e5", R"({
  "schema_version": 1, "preset": "wg0-lowgain", "gain": {"target_n": 1e5}
})"},
      // WG1: weak GVD, beta_p = 30, beta_s = beta_i = 10 fs^2/mm (tau2 = 0.21 fs).
      {"wg1-lowgain", "WG1, weak second-order dispersion, N = 1e-5", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "dispersion": {"type": "taylor", "alpha_s": 30, "alpha_i": 20,
                 "beta_p": 30, "beta_s": 10, "beta_i": 10, "length_mm": 10},
  "gain": {"target_n": 1e-5}
})"},
      {"wg1-highgain", "WG1 at N = 1e5", R"({
  "schema_version": 1, "preset": "wg1-lowgain", "gain": {"target_n": 1e5}
})"},
      // WG2: strong GVD, beta_p = 300, beta_s = -100, beta_i = 100 (tau2 = 0.42 fs).
      {"wg2-lowgain", "WG2, strong second-order dispersion, N = 1e-5", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "dispersion": {"type": "taylor", "alpha_s": 30, "alpha_i": 20,
                 "beta_p": 300, "beta_s": -100, "beta_i": 100, "length_mm": 10},
  "gain": {"target_n": 1e-5}
})"},
      {"wg2-highgain", "WG2 at N = 1e5", R"({
  "schema_version": 1, "preset": "wg2-lowgain", "gain": {"target_n": 1e5}
})"},
      // Random-ensemble example shown as a diamond: strongly shifted at high gain.
      {"ex1", "random-ensemble example 1 at N = 1e7", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "dispersion": {"type": "taylor", "alpha_s": 29.15, "alpha_i": -33.79,
                 "beta_p": -338, "beta_s": 131, "beta_i": -265, "length_mm": 10},
  "gain": {"target_n": 1e7}
})"},
      // Random-ensemble example shown as a triangle.
      {"ex2", "random-ensemble example 2 at N = 1e7", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "dispersion": {"type": "taylor", "alpha_s": -5.49, "alpha_i": -5.89,
                 "beta_p": -11, "beta_s": -150, "beta_i": 320, "length_mm": 10},
  "gain": {"target_n": 1e7}
})"},
      // Zero-mismatch curve nearly perpendicular to the pump diagonal, so no shift.
      {"no-shift", "waveguide without a gain-induced shift, N = 1e5", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "dispersion": {"type": "taylor", "alpha_s": 200, "alpha_i": 100,
                 "beta_p": 300, "beta_s": 150, "beta_i": 100, "length_mm": 10},
  "gain": {"target_n": 1e5}
})"},
      // Randomly drawn waveguide marked with a star in the ensemble landscape.
      {"random-star", "random waveguide whose spectra separate with gain, N = 1e5", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "dispersion": {"type": "taylor", "alpha_s": -33.9, "alpha_i": -34.3,
                 "beta_p": 144, "beta_s": -137, "beta_i": -278, "length_mm": 10},
  "gain": {"target_n": 1e5}
})"},
      // 1 mm PPKTP, gamma -> (beta, gamma), 10 fs pump, full Sellmeier mismatch.
      // The 10 fs pump is far wider than the waveguide grid, hence
      // delta_omega = 2 pi * 0.72e-3 rad/fs.
      {"ppktp", "1 mm PPKTP, 10 fs pump, full Sellmeier mismatch, N = 1.6e6", R"({
  "schema_version": 1,
  "model": "rigorous",
  "grid": {"delta_omega": 0.004523893421169303, "size": 255},
  "pump": {"lambda_p_um": 0.775, "tau_fs": 10, "cw": false},
  "dispersion": {"type": "sellmeier", "crystal": "ppktp", "length_mm": 1,
                 "taylor_mode": false, "poling_period_um": 10.8},
  "gain": {"target_n": 1.6e6}
})"},
      // Ensemble with alpha ~ U(-35, 35) fs/mm and every beta = 0. The fast
      // mode keeps the step and halves the grid to 127 points; coarsening the
      // step instead rejects nearly every candidate as too narrow.
      {"fig2a", "ensemble without second-order dispersion, 20 samples, fast grid", R"({
  "schema_version": 1,
  // 2 pi * 0.36e-3 rad/fs
  "grid": {"delta_omega": 0.0022619467105846514, "size": 127},
  "pump": {"lambda_p_um": 0.775, "tau_fs": 80, "cw": false},
  "sampling": {"seed": 20250101, "count": 20, "beta_zero": true,
               "alpha_range": [-35, 35], "beta_range": [-350, 350], "length_mm": 10,
               "gain_ladder": [1e-5, 1, 10, 1e3, 1e5]}
})"},
      // alpha ~ U(-35, 35) fs/mm, beta ~ U(-350, 350) fs^2/mm.
      {"fig2b", "ensemble with second-order dispersion, 50 samples, full ladder", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "sampling": {"seed": 20250101, "count": 50, "beta_zero": false,
               "alpha_range": [-35, 35], "beta_range": [-350, 350], "length_mm": 10,
               "gain_ladder": [1e-5, 1, 10, 1e3, 1e5]}
})"},
      {"fig2c", "ensemble landscape at N = 10, 50 samples", R"({
  "schema_version": 1, "preset": "waveguide-base",
  "sampling": {"seed": 20250101, "count": 50, "beta_zero": false,
               "alpha_range": [-35, 35], "beta_range": [-350, 350], "length_mm": 10,
               "gain_ladder": [10], "landscape_n": 10}
})"},
  };
  return table;
}

inline const Preset* find_preset(std::string_view name) {
  for (const Preset& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

/// Expands "preset" references (recursively) and merges the config on top.
inline json expand_presets(const json& config, int depth = 0) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (!config.contains("preset")) return config;
  if (depth > 8) throw ConfigError("preset chain too deep");
  if (!config.at("preset").is_string()) throw ConfigError("'preset' must be a string");
  const std::string name = config.at("preset").get<std::string>();
  const Preset* preset = find_preset(name);
  if (!preset) throw ConfigError("unknown preset '" + name + "'");
  json base = expand_presets(parse_json_text(std::string(preset->text), "preset " + name), depth + 1);
  json patch = config;
  patch.erase("preset");
  merge_config(base, patch);
  base["preset"] = name;
  return base;
}

inline json preset_json(std::string_view name) {
  return expand_presets(json{{"schema_version", kSchemaVersion}, {"preset", std::string(name)}});
}

}  // namespace hgpdc
