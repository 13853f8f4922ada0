#include <cmath>

#include <gtest/gtest.h>

#include "hgpdc/averaged.hpp"
#include "hgpdc/observables.hpp"

using namespace hgpdc;

namespace {

const FrequencyGrid kGrid = build_grid(0.775, 0.001, 401);

Eigen::VectorXd gaussian(double mean, double sigma, double peak = 1.0) {
  const Eigen::VectorXd x = kGrid.detunings();
  return peak * (-0.5 * ((x.array() - mean) / sigma).square()).exp().matrix();
}

}  // namespace

TEST(Observables, TrimZeroesSmallBins) {
  Eigen::VectorXd v(5);
  v << 1.0, 0.004, 0.005, 0.006, 0.0;
  const auto t = trim(v);
  EXPECT_EQ(t[1], 0.0);
  EXPECT_EQ(t[2], 0.0);  // at the threshold: dropped
  EXPECT_EQ(t[3], 0.006);
  EXPECT_EQ(t[0], 1.0);
}

TEST(Observables, MomentsOfGaussian) {
  const auto m = moments(kGrid, gaussian(0.02, 0.015));
  EXPECT_NEAR(m.mean, 0.02, 1e-12);
  EXPECT_NEAR(m.stddev, 0.015, 1e-9);
  // trimming at 0.5 % of the peak cuts tails beyond sqrt(2 ln 200) sigma
  const double c = std::sqrt(2.0 * std::log(200.0));
  const double truncated = 0.015 * std::sqrt(1.0 - 2.0 * c * std::exp(-0.5 * c * c) /
                                                       (std::sqrt(2.0 * std::numbers::pi) * std::erf(c / std::sqrt(2.0))));
  EXPECT_NEAR(trimmed_moments(kGrid, gaussian(0.02, 0.015)).stddev, truncated, 2e-4 * 0.015 + 0.001 * 0.015);
}

TEST(Observables, RsdOfShiftedGaussians) {
  const double d = 0.01, sigma = 0.02;
  const double expected = d / trimmed_moments(kGrid, gaussian(0.0, sigma)).stddev;
  EXPECT_NEAR(rsd(kGrid, gaussian(0.5 * d, sigma), gaussian(-0.5 * d, sigma)), expected, 1e-9);
  EXPECT_NEAR(rsd(kGrid, gaussian(0.0, sigma), gaussian(0.0, sigma)), 0.0, 1e-12);
}

TEST(Observables, OverlapOfShiftedGaussians) {
  // <g(x - D/2), g(x + D/2)> / |g|^2 = exp(-D^2 / (4 sigma^2)); D = 2 sigma gives 1/e
  const double sigma = 0.01;
  EXPECT_NEAR(overlap(gaussian(sigma, sigma), gaussian(-sigma, sigma)), std::exp(-1.0), 1e-9);
  EXPECT_NEAR(overlap(gaussian(0, sigma), gaussian(0, sigma, 3.0)), 1.0, 1e-14);
}

TEST(Observables, FwhmOfGaussianWithinOneBin) {
  const double sigma = 0.0123;
  EXPECT_NEAR(fwhm(kGrid, gaussian(0.003, sigma)), 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma,
              kGrid.step);
}

TEST(Observables, FwhmOfRectangleUsesOutermostCrossings) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kGrid.size);
  v.segment(100, 21).setOnes();
  v[110] = 0.2;  // interior dip does not split the width
  // crossings interpolate halfway into the neighbouring zero bins
  EXPECT_NEAR(fwhm(kGrid, v), 21 * kGrid.step, 1e-12);
}

TEST(Observables, ErrorsForDegenerateInput) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(kGrid.size);
  EXPECT_THROW(trim(zero), EmptySpectrumError);
  EXPECT_THROW(overlap(zero, gaussian(0, 0.01)), EmptySpectrumError);
  EXPECT_THROW(fwhm(kGrid, zero), EmptySpectrumError);
  EXPECT_THROW(fwhm(kGrid, Eigen::VectorXd::Ones(kGrid.size)), WidthExceedsGridError);
  Eigen::VectorXd spike = zero;
  spike[200] = 1.0;
  EXPECT_THROW(rsd(kGrid, spike, spike), DegenerateSpectrumError);
}

TEST(Observables, MetricsReportOffGridWidthAsNan) {
  SpectralResult r;
  r.grid = kGrid;
  r.signal = Eigen::VectorXd::Ones(kGrid.size);
  r.idler = gaussian(0, 0.01);
  const auto m = metrics(r);
  EXPECT_TRUE(std::isnan(m.fwhm_signal));
  EXPECT_FALSE(std::isnan(m.fwhm_idler));
}

TEST(Observables, LowGainJsiIsProportionalToTpaSquared) {
  const auto field = CouplingField(build_grid(0.775, 0.0045, 41), PumpParams{0.775, 80.0, false},
                                   TaylorDispersion{30, 20, 300, -100, 100, 10.0});
  const auto t = propagate(field, 1e-3);
  const auto j = jsi(t);
  const Eigen::MatrixXd reference = tpa(field).values.cwiseAbs2();
  const Eigen::MatrixXd a = j.values / j.values.maxCoeff();
  const Eigen::MatrixXd b = reference / reference.maxCoeff();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LT(j.imaginary_residual, 1e-10);
  // marginals of the JSI are the single-photon spectra at low gain
  const auto s = spectra(t);
  EXPECT_LT((field.grid().step * j.values.rowwise().sum() - s.signal).cwiseAbs().maxCoeff(),
            1e-3 * s.signal.maxCoeff());
}
