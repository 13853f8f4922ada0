#include <cmath>

#include <gtest/gtest.h>

#include "hgpdc/calibration.hpp"

using namespace hgpdc;

namespace {

CouplingField field(double tau = 80.0) {
  return CouplingField(build_grid(0.775, 0.0045, 41), PumpParams{0.775, tau, false},
                       TaylorDispersion{30, 20, 300, -100, 100, 10.0});
}

}  // namespace

class CalibrationTarget : public ::testing::TestWithParam<double> {};

TEST_P(CalibrationTarget, ReachesTargetPhotonNumber) {
  const double target = GetParam();
  const auto f = field();
  SolverSettings s;
  s.steps = 200;
  const auto cal = calibrate_gain(target, f, s);
  EXPECT_LE(std::abs(cal.photons - target) / target, kCalibrationTolerance);
  ASSERT_TRUE(cal.tensors.has_value());
  EXPECT_EQ(cal.tensors->gain, cal.gain);
  // independent re-propagation at the returned gain
  const double check = signal_photons(propagate(f, cal.gain, s));
  EXPECT_NEAR(check, cal.photons, 1e-12 * check);
}

INSTANTIATE_TEST_SUITE_P(Targets, CalibrationTarget, ::testing::Values(1e-5, 1.0, 10.0, 1e3, 1e5));

TEST(Calibration, AveragedGainInvertsPhotonNumber) {
  const auto f = field();
  const auto modes = schmidt_decompose(tpa(f), f.grid());
  for (double target : {1e-5, 1.0, 1e4}) {
    const double g = averaged_gain_for(modes, f.length(), target);
    EXPECT_NEAR(averaged_photons(modes, g, f.length()), target, 1e-9 * target);
  }
  // low-gain limit: N ~ (gain L)^2 sum s_k^2
  const double g = averaged_gain_for(modes, f.length(), 1e-8);
  EXPECT_NEAR(g * g * f.length() * f.length() * modes.singular_values.squaredNorm(), 1e-8, 1e-12);
}

TEST(Calibration, RejectsNonPositiveTarget) {
  EXPECT_THROW(calibrate_gain(0.0, field()), ConfigError);
}

TEST(Calibration, UnreachableTargetFails) {
  SolverSettings s;
  s.steps = 64;
  EXPECT_THROW(calibrate_gain(1e8, field(), s, 2.0), CalibrationError);
}
