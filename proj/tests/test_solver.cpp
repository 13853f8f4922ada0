#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "hgpdc/observables.hpp"
#include "hgpdc/solver.hpp"

using namespace hgpdc;

namespace {

const TaylorDispersion kWg2{30, 20, 300, -100, 100, 10.0};

CouplingField cw_field(int m = 21) {
  return CouplingField(build_grid(0.775, 0.01, m), PumpParams{0.775, 80.0, true}, kWg2);
}

CouplingField pulsed_field(int m = 41) {
  return CouplingField(build_grid(0.775, 0.0045, m), PumpParams{0.775, 80.0, false}, kWg2);
}

// Two-mode parametric amplifier with a constant mismatch: |F|^2 = c^2/g^2 sinh^2(g L)
// with g^2 = c^2 - dk^2 / 4 (sin when g^2 < 0).
double cw_pair_photons(double c, double dk, double length) {
  const double g2 = c * c - 0.25 * dk * dk;
  if (g2 > 0) {
    const double g = std::sqrt(g2);
    return c * c / g2 * std::pow(std::sinh(g * length), 2);
  }
  if (g2 < 0) {
    const double g = std::sqrt(-g2);
    return c * c / -g2 * std::pow(std::sin(g * length), 2);
  }
  return c * c * length * length;
}

double cw_error(const CouplingField& field, double gain, int steps) {
  SolverSettings s;
  s.steps = steps;
  const auto spec = spectra(propagate(field, gain, s));
  const auto& g = field.grid();
  double err = 0.0;
  for (int j = 0; j < g.size; ++j) {
    const double dk = field.mismatch()(j, g.size - 1 - j);
    const double expected = cw_pair_photons(gain * g.step, dk, field.length()) / g.step;
    err = std::max(err, std::abs(spec.signal[j] - expected) / std::max(expected, 1.0));
  }
  return err;
}

}  // namespace

TEST(Solver, ZeroGainIsIdentity) {
  const auto t = propagate(pulsed_field(), 0.0);
  const auto id = Eigen::MatrixXcd::Identity(41, 41);
  EXPECT_EQ((t.ea - id).norm(), 0.0);
  EXPECT_EQ((t.eb - id).norm(), 0.0);
  EXPECT_EQ(t.fa.norm(), 0.0);
  EXPECT_EQ(t.fb.norm(), 0.0);
  EXPECT_EQ(signal_photons(t), 0.0);
}

TEST(Solver, ContinuousWaveMatchesTwoModeAmplifier) {
  const auto field = cw_field();
  const double gain = 20.0;  // c L = 2
  EXPECT_LT(cw_error(field, gain, 800), 1e-8);
}

TEST(Solver, PhaseMatchedContinuousWaveIsPureSinh) {
  const auto field =
      CouplingField(build_grid(0.775, 0.01, 11), PumpParams{0.775, 80.0, true},
                    TaylorDispersion{0, 0, 0, 0, 0, 10.0});
  const double gain = 15.0;
  const auto spec = spectra(propagate(field, gain));
  const double expected = std::pow(std::sinh(gain * 0.01 * 10.0), 2) / 0.01;
  for (int j = 0; j < 11; ++j) EXPECT_NEAR(spec.signal[j], expected, 1e-8 * expected);
}

TEST(Solver, FourthOrderConvergence) {
  const auto field = cw_field();
  const double e1 = cw_error(field, 20.0, 40);
  const double e2 = cw_error(field, 20.0, 80);
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 13.0);
  EXPECT_LT(ratio, 19.0);
}

TEST(Solver, PreservesBosonicCommutators) {
  const auto field = pulsed_field();
  const auto t = propagate(field, 20.0);
  EXPECT_GT(signal_photons(t), 1.0);
  EXPECT_LT(commutator_residual(t), 1e-8);
}

TEST(Solver, SignalAndIdlerPhotonNumbersAgree) {
  const auto t = propagate(pulsed_field(), 20.0);
  EXPECT_NEAR(signal_photons(t), idler_photons(t), 1e-8 * signal_photons(t));
}

TEST(Solver, BandedProductMatchesDenseProduct) {
  const int m = 101, hw = 5;
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Random(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      if (std::abs(r + c - (m - 1)) > hw) k(r, c) = 0.0;
  const Eigen::MatrixXcd w = Eigen::MatrixXcd::Random(m, 2 * m);
  const std::complex<double> f(0.0, 2.5);
  Eigen::MatrixXcd out(m, 2 * m);
  for (bool tr : {false, true}) {
    detail::antiband_product(k, hw, tr, w, f, out);
    const Eigen::MatrixXcd dense = f * (tr ? Eigen::MatrixXcd(k.transpose()) : k) * w.conjugate();
    EXPECT_LT((out - dense).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Solver, DivergenceIsReported) {
  EXPECT_THROW(propagate(cw_field(), 1e4), DivergedError);
}

TEST(Solver, StepRules) {
  EXPECT_EQ(default_steps(10.0), 400);
  EXPECT_EQ(default_steps(1.0), 200);
  EXPECT_THROW(checked_steps(8), ConfigError);
  SolverSettings s;
  s.steps = 64;
  EXPECT_EQ(resolved_steps(s, pulsed_field()), 64);
  const auto field = pulsed_field();
  const int auto_steps = default_steps(field);
  EXPECT_GE(auto_steps, 400);
  EXPECT_GE(auto_steps * kPhasePerStep, field.length() * field.max_mismatch(kPhaseAmplitudeFloor));
  EXPECT_THROW(propagate(field, -1.0), ConfigError);
}

TEST(Solver, ConvergenceCheckReportsRefinedPhotons) {
  SolverSettings s;
  s.steps = 200;
  s.convergence_check = true;
  const auto r = propagate_checked(pulsed_field(), 20.0, s);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.convergence.relative_change, 1e-4);
  EXPECT_GT(r.convergence.photons_refined, 0.0);
}
