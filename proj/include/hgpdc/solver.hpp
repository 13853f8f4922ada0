#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Core>

#include "hgpdc/coupling.hpp"
#include "hgpdc/errors.hpp"

namespace hgpdc {

struct SolverSettings {
  /// Uniform z-steps; 0 selects default_steps().
  int steps = 0;
  /// Re-run at twice the steps and compare the photon number.
  bool convergence_check = false;
  /// Fixed reduction order. The kernels are single-threaded, so this only
  /// pins Eigen to one thread when it was built with OpenMP.
  bool deterministic = true;
};

/// 400 steps for a 10 mm waveguide, 200 for 1 mm.
inline int default_steps(double length_mm) {
  return std::max(200, static_cast<int>(std::lround(40.0 * length_mm)));
}

/// Largest phase dk * h a default step may accumulate, and the pump amplitude
/// below which entries are ignored when measuring it.
inline constexpr double kPhasePerStep = 0.16;
inline constexpr double kPhaseAmplitudeFloor = 1e-6;

/// Length rule, raised so that no significant coupling entry rotates by more
/// than kPhasePerStep per step. Broadband pumps need far more steps.
inline int default_steps(const CouplingField& field) {
  const double phase = field.length() * field.max_mismatch(kPhaseAmplitudeFloor);
  return std::max(default_steps(field.length()),
                  static_cast<int>(std::ceil(phase / kPhasePerStep)));
}

inline int checked_steps(int steps) {
  if (steps < 16) throw ConfigError("solver step count must be at least 16");
  return steps;
}

inline int resolved_steps(const SolverSettings& settings, double length_mm) {
  return checked_steps(settings.steps > 0 ? settings.steps : default_steps(length_mm));
}

inline int resolved_steps(const SolverSettings& settings, const CouplingField& field) {
  return checked_steps(settings.steps > 0 ? settings.steps : default_steps(field));
}

/// Bogoliubov transfer matrices in the delta_omega-scaled convention, so that
/// the vacuum transform is E = I, F = 0.
struct BogoliubovTensors {
  Eigen::MatrixXcd ea, fa, eb, fb;
  double gain = 0.0;
  double z = 0.0;
  FrequencyGrid grid;

  static BogoliubovTensors vacuum(const FrequencyGrid& grid, double gain = 0.0) {
    const int m = grid.size;
    return {Eigen::MatrixXcd::Identity(m, m), Eigen::MatrixXcd::Zero(m, m),
            Eigen::MatrixXcd::Identity(m, m), Eigen::MatrixXcd::Zero(m, m), gain, 0.0, grid};
  }
};

/// max |E E^dagger - F F^dagger - I| over both subsystems.
inline double commutator_residual(const BogoliubovTensors& t) {
  const auto id = Eigen::MatrixXcd::Identity(t.ea.rows(), t.ea.cols());
  const double a = (t.ea * t.ea.adjoint() - t.fa * t.fa.adjoint() - id).cwiseAbs().maxCoeff();
  const double b = (t.eb * t.eb.adjoint() - t.fb * t.fb.adjoint() - id).cwiseAbs().maxCoeff();
  return std::max(a, b);
}

/// Total signal photon number delta_omega * sum_j n_s(omega_j) = ||F_a||_F^2.
inline double signal_photons(const BogoliubovTensors& t) { return t.fa.squaredNorm(); }
inline double idler_photons(const BogoliubovTensors& t) { return t.fb.squaredNorm(); }

namespace detail {

inline constexpr double kDivergenceBound = 1e30;
#ifndef HGPDC_ROW_BLOCK
#define HGPDC_ROW_BLOCK 32
#endif
inline constexpr int kRowBlock = HGPDC_ROW_BLOCK;

/// out = factor * op(K) * conj(W), where op is identity or transpose and K is
/// zero outside the anti-diagonal band |j + k - (M - 1)| <= halfwidth.
inline void antiband_product(const Eigen::MatrixXcd& k, int halfwidth, bool transposed,
                             const Eigen::MatrixXcd& w, std::complex<double> factor,
                             Eigen::MatrixXcd& out) {
  const int m = static_cast<int>(k.rows());
  if (2 * halfwidth + kRowBlock >= m) {
    if (transposed)
      out.noalias() = factor * k.transpose() * w.conjugate();
    else
      out.noalias() = factor * k * w.conjugate();
    return;
  }
  for (int r0 = 0; r0 < m; r0 += kRowBlock) {
    const int nb = std::min(kRowBlock, m - r0);
    const int c0 = std::max(0, m - 1 - (r0 + nb - 1) - halfwidth);
    const int c1 = std::min(m - 1, m - 1 - r0 + halfwidth);
    const int nc = c1 - c0 + 1;
    if (transposed)
      out.middleRows(r0, nb).noalias() =
          factor * k.block(c0, r0, nc, nb).transpose() * w.middleRows(c0, nc).conjugate();
    else
      out.middleRows(r0, nb).noalias() =
          factor * k.block(r0, c0, nb, nc) * w.middleRows(c0, nc).conjugate();
  }
}

/// Classical RK4 over [0, length] for the stacked state
///   A = [E_a | F_a],  B = [F_b | E_b],
///   dA/dz = i gain K(z) conj(B),  dB/dz = i gain K(z)^T conj(A).
/// The (E_a, F_b) and (E_b, F_a) pairs stay uncoupled; stacking them only
/// widens the matrix products.
///
/// `fill(z, K)` writes delta_omega * J(z). When `z_independent` is set it is
/// called once.
template <class Fill>
void integrate_stacked(Fill&& fill, bool z_independent, int halfwidth, double gain,
                       double length, int steps, Eigen::MatrixXcd& a, Eigen::MatrixXcd& b) {
  const Eigen::Index m = a.rows();
  const double h = length / steps;
  const std::complex<double> ig(0.0, gain);

  Eigen::MatrixXcd k_start(m, m), k_mid(m, m), k_end(m, m);
  k_start.setZero();
  k_mid.setZero();
  k_end.setZero();
  fill(0.0, k_start);
  if (z_independent) {
    k_mid = k_start;
    k_end = k_start;
  }

  Eigen::MatrixXcd da(m, 2 * m), db(m, 2 * m);
  Eigen::MatrixXcd acc_a(m, 2 * m), acc_b(m, 2 * m);
  Eigen::MatrixXcd ta(m, 2 * m), tb(m, 2 * m);

  auto rhs = [&](const Eigen::MatrixXcd& kz, const Eigen::MatrixXcd& ya,
                 const Eigen::MatrixXcd& yb) {
    antiband_product(kz, halfwidth, false, yb, ig, da);
    antiband_product(kz, halfwidth, true, ya, ig, db);
  };

  for (int n = 0; n < steps; ++n) {
    const double z = n * h;
    if (!z_independent) {
      if (n > 0) k_start.swap(k_end);
      fill(z + 0.5 * h, k_mid);
      fill((n + 1) * h, k_end);
    }

    rhs(k_start, a, b);
    acc_a = a + (h / 6.0) * da;
    acc_b = b + (h / 6.0) * db;
    ta = a + (0.5 * h) * da;
    tb = b + (0.5 * h) * db;

    rhs(k_mid, ta, tb);
    acc_a += (h / 3.0) * da;
    acc_b += (h / 3.0) * db;
    ta = a + (0.5 * h) * da;
    tb = b + (0.5 * h) * db;

    rhs(k_mid, ta, tb);
    acc_a += (h / 3.0) * da;
    acc_b += (h / 3.0) * db;
    ta = a + h * da;
    tb = b + h * db;

    rhs(k_end, ta, tb);
    a = acc_a + (h / 6.0) * da;
    b = acc_b + (h / 6.0) * db;

    const double peak = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    if (!std::isfinite(peak) || peak > kDivergenceBound)
      throw DivergedError("Bogoliubov integration diverged at z = " + std::to_string(z + h) +
                              " mm (gain " + std::to_string(gain) + ")",
                          z + h);
  }
}

template <class Fill>
BogoliubovTensors propagate_with(Fill&& fill, bool z_independent, int halfwidth,
                                 const FrequencyGrid& grid, double gain, double length,
                                 int steps) {
  if (!(gain >= 0.0) || !std::isfinite(gain)) throw ConfigError("gain must be non-negative");
  const int m = grid.size;
  Eigen::MatrixXcd a(m, 2 * m), b(m, 2 * m);
  a << Eigen::MatrixXcd::Identity(m, m), Eigen::MatrixXcd::Zero(m, m);
  b << Eigen::MatrixXcd::Zero(m, m), Eigen::MatrixXcd::Identity(m, m);
  if (gain > 0.0)
    integrate_stacked(std::forward<Fill>(fill), z_independent, halfwidth, gain, length, steps, a,
                      b);
  return {a.leftCols(m), a.rightCols(m), b.rightCols(m), b.leftCols(m), gain, length, grid};
}

}  // namespace detail

/// Spatially ordered solution of the coupled Bogoliubov equations at z = L.
inline BogoliubovTensors propagate(const CouplingField& field, double gain,
                                   const SolverSettings& settings = {}) {
  const double length = field.length();
  const int steps = resolved_steps(settings, field);
  return detail::propagate_with(
      [&field](double z, Eigen::MatrixXcd& k) { field.scaled_coupling(z, k); }, false,
      field.band_halfwidth(), field.grid(), gain, length, steps);
}

struct ConvergenceReport {
  double photons = 0.0;         ///< N at the configured step count
  double photons_refined = 0.0; ///< N at twice the step count
  double relative_change = 0.0;
};

struct CheckedPropagation {
  BogoliubovTensors tensors;
  ConvergenceReport convergence;
  bool converged = true;
};

/// propagate() plus the step-doubling check when settings.convergence_check is
/// set. A failed check is reported, not thrown.
inline CheckedPropagation propagate_checked(const CouplingField& field, double gain,
                                            const SolverSettings& settings,
                                            double tolerance = 1e-4) {
  CheckedPropagation out{propagate(field, gain, settings), {}, true};
  out.convergence.photons = signal_photons(out.tensors);
  out.convergence.photons_refined = out.convergence.photons;
  if (settings.convergence_check && gain > 0.0) {
    SolverSettings fine = settings;
    fine.steps = 2 * resolved_steps(settings, field);
    const double refined = signal_photons(propagate(field, gain, fine));
    out.convergence.photons_refined = refined;
    out.convergence.relative_change =
        std::abs(refined - out.convergence.photons) / std::max(refined, 1e-300);
    out.converged = out.convergence.relative_change <= tolerance;
  }
  return out;
}

}  // namespace hgpdc
