#include <gtest/gtest.h>

#include "hgpdc/config.hpp"
#include "hgpdc/presets.hpp"
#include "hgpdc/run.hpp"

using namespace hgpdc;

namespace {

json minimal() {
  return parse_json_text(R"({
    "schema_version": 1,
    // comments are allowed
    "grid": {"delta_omega": 0.0045, "size": 41},
    "pump": {"lambda_p_um": 0.775, "tau_fs": 80},
    "dispersion": {"type": "taylor", "alpha_s": 30, "alpha_i": 20,
                   "beta_p": 300, "beta_s": -100, "beta_i": 100, "length_mm": 10},
    "gain": {"target_n": 1.0}
  })", "test");
}

}  // namespace

TEST(Config, ParsesMinimalConfig) {
  const auto c = parse_config(minimal());
  EXPECT_EQ(c.model, ModelKind::rigorous);
  EXPECT_EQ(c.grid->size, 41);
  EXPECT_FALSE(c.pump->continuous_wave);
  EXPECT_EQ(*c.gain->target_photons, 1.0);
  EXPECT_EQ(c.dispersion->taylor.beta_p, 300.0);
  EXPECT_NO_THROW(require_simulation(c));
}

TEST(Config, MissingPumpDurationIsAConfigError) {
  auto j = minimal();
  j["pump"].erase("tau_fs");
  try {
    parse_config(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("pump.tau_fs"), std::string::npos);
    EXPECT_EQ(e.exit_code(), ExitCode::config);
  }
}

TEST(Config, RejectsMalformedSections) {
  auto bad = [](auto mutate) {
    auto j = minimal();
    mutate(j);
    return j;
  };
  EXPECT_THROW(parse_config(bad([](json& j) { j["grid"]["size"] = 40; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["grid"]["extra"] = 1; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["unknown"] = 1; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["schema_version"] = 2; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["gain"] = {{"target_n", 1}, {"gamma", 2}}; })),
               ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["gain"] = json::object(); })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["gain"] = {{"target_n", -1}}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["dispersion"]["type"] = "magic"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["dispersion"]["alpha_s"] = "fast"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["solver"] = {{"steps", 4}}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["sweep"] = {{"photons", {10, 1}}}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["model"] = "quantum"; })), ConfigError);
  EXPECT_THROW(parse_json_text("{ not json", "x"), ConfigError);
  EXPECT_THROW(read_json_file("/nonexistent/config.json"), ConfigError);
}

TEST(Config, MissingSectionsReportedBySimulationCheck) {
  auto j = minimal();
  j.erase("dispersion");
  EXPECT_THROW(require_simulation(parse_config(j)), ConfigError);
  j = minimal();
  j.erase("gain");
  EXPECT_THROW(require_simulation(parse_config(j)), ConfigError);
}

TEST(Config, CanonicalFormRoundTrips) {
  const auto c = parse_config(minimal());
  const json canonical = to_json(c);
  EXPECT_EQ(to_json(parse_config(canonical)), canonical);
  EXPECT_EQ(config_hash(canonical), config_hash(to_json(parse_config(canonical))));
  EXPECT_EQ(config_hash(canonical).size(), 12u);
  auto j = minimal();
  j["pump"]["tau_fs"] = 81;
  EXPECT_NE(config_hash(to_json(parse_config(j))), config_hash(canonical));
}

TEST(Config, OverridesAndMerging) {
  auto j = minimal();
  apply_override(j, "pump.tau_fs=40");
  apply_override(j, "model=\"averaged\"");
  apply_override(j, "gain.gamma=3");
  const auto c = parse_config(j);
  EXPECT_EQ(c.pump->duration_fs, 40.0);
  EXPECT_EQ(c.model, ModelKind::averaged);
  EXPECT_TRUE(c.gain->gamma.has_value());
  EXPECT_FALSE(c.gain->target_photons.has_value());
  EXPECT_THROW(apply_override(j, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(j, "pump..tau_fs=1"), ConfigError);

  json base = minimal();
  merge_config(base, json::parse(R"({"gain": {"gamma": 2}, "pump": {"tau_fs": 10}})"));
  EXPECT_FALSE(base["gain"].contains("target_n"));
  EXPECT_EQ(base["pump"]["lambda_p_um"], 0.775);
  EXPECT_EQ(base["pump"]["tau_fs"], 10);
}

TEST(Presets, AllPresetsParse) {
  for (const auto& p : presets()) {
    SCOPED_TRACE(std::string(p.name));
    EXPECT_NO_THROW(parse_config(preset_json(p.name)));
  }
  EXPECT_THROW(preset_json("nope"), ConfigError);
}

TEST(Presets, WaveguidesCarryTheirCharacteristicTimes) {
  const auto wg1 = parse_config(preset_json("wg1-highgain"));
  const auto t = characteristic_times(make_dispersion(wg1));
  EXPECT_NEAR(t.tau1, 100.0, 1e-9);
  EXPECT_NEAR(t.tau2, 0.21, 0.01);
  EXPECT_EQ(*wg1.gain->target_photons, 1e5);
  EXPECT_EQ(wg1.preset, "wg1-highgain");
  EXPECT_EQ(wg1.grid->size, 255);
}

TEST(Presets, PresetWithUserOverrides) {
  json j{{"schema_version", 1}, {"preset", "wg2-lowgain"}, {"gain", {{"gamma", 5}}}};
  const auto c = parse_config(expand_presets(j));
  EXPECT_EQ(*c.gain->gamma, 5.0);
  EXPECT_EQ(c.dispersion->taylor.beta_p, 300.0);
}

TEST(Presets, SamplingTakesGridFromTopLevel) {
  const auto c = parse_config(preset_json("fig2a"));
  ASSERT_TRUE(c.sampling.has_value());
  EXPECT_EQ(c.sampling->grid_size, 127);
  EXPECT_TRUE(c.sampling->beta_zero);
  EXPECT_EQ(c.sampling->count, 20);
}
