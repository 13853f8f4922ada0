#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hgpdc/grid.hpp"

using namespace hgpdc;

TEST(Grid, SymmetricDetuningsAroundHalfPumpFrequency) {
  const auto g = build_grid(0.775, 0.01, 5);
  EXPECT_EQ(g.center_index(), 2);
  EXPECT_DOUBLE_EQ(g.detuning(0), -0.02);
  EXPECT_DOUBLE_EQ(g.detuning(2), 0.0);
  EXPECT_DOUBLE_EQ(g.detuning(4), 0.02);
  EXPECT_NEAR(g.center, 0.5 * 2.0 * std::numbers::pi * kSpeedOfLight / 0.775e-3, 1e-12);
  EXPECT_DOUBLE_EQ(g.span(), 0.04);
}

TEST(Grid, SharedGridCenterIsHalfThePumpFrequency) {
  const auto g = build_grid(0.775, 2 * std::numbers::pi * 0.36e-3, 255);
  // omega_p = 2 pi c / lambda_p with c = 0.299792458 um/fs
  EXPECT_NEAR(2.0 * g.center, 2.0 * std::numbers::pi * 0.299792458 / 0.775, 1e-12);
  EXPECT_NEAR(wavelength_um_from_angular(g.center), 1.55, 1e-12);
}

TEST(Grid, RejectsEvenOrTinySizesAndBadSteps) {
  EXPECT_THROW(build_grid(0.775, 0.01, 4), ConfigError);
  EXPECT_THROW(build_grid(0.775, 0.01, 1), ConfigError);
  EXPECT_THROW(build_grid(0.775, 0.0, 5), ConfigError);
  EXPECT_THROW(build_grid(0.775, -1.0, 5), ConfigError);
  EXPECT_THROW(build_grid(0.0, 0.01, 5), ConfigError);
}

TEST(Pump, GaussianAmplitudeConvention) {
  const PumpParams p{0.775, 80.0, false};
  EXPECT_DOUBLE_EQ(pump_amplitude(p, 0.0), 1.0);
  EXPECT_NEAR(pump_amplitude(p, 1.0 / 80.0), std::exp(-0.5), 1e-15);
  const double half = 0.5 * pump_amplitude_fwhm(p);
  EXPECT_NEAR(pump_amplitude(p, half), 0.5, 1e-12);
  EXPECT_NEAR(pump_amplitude_fwhm(p), 2.0 * std::sqrt(2.0 * std::log(2.0)) / 80.0, 1e-15);
}

TEST(Pump, ContinuousWaveIsAKroneckerDelta) {
  const PumpParams p{0.775, 80.0, true};
  EXPECT_EQ(pump_amplitude(p, 0.0), 1.0);
  EXPECT_EQ(pump_amplitude(p, 1e-9), 0.0);
  EXPECT_EQ(pump_amplitude_fwhm(p), 0.0);
}

TEST(Pump, ValidationRejectsNonPositiveDuration) {
  EXPECT_THROW(validate(PumpParams{0.775, 0.0, false}), ConfigError);
  EXPECT_THROW(validate(PumpParams{-1.0, 80.0, false}), ConfigError);
  EXPECT_NO_THROW(validate(PumpParams{0.775, 0.0, true}));
}
