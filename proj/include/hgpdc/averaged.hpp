#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "hgpdc/coupling.hpp"
#include "hgpdc/errors.hpp"
#include "hgpdc/solver.hpp"

namespace hgpdc {

/// Schmidt decomposition TPA(w, w') = sum_k s_k psi_k(w) phi_k(w').
///
/// s_k are the singular values of delta_omega * TPA. Modes are columns and are
/// normalized as delta_omega * sum_j |psi_k(w_j)|^2 = 1.
struct SchmidtModes {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXcd left;   ///< psi_k as columns
  Eigen::MatrixXcd right;  ///< phi_k as columns
  FrequencyGrid grid;

  Eigen::Index count() const { return singular_values.size(); }

  /// sum_k s_k psi_k phi_k^T.
  Eigen::MatrixXcd reconstruct() const {
    return left * singular_values.asDiagonal() * right.transpose();
  }
};

/// Singular values below this fraction of the largest are dropped.
inline constexpr double kSchmidtTruncation = 1e-12;

inline SchmidtModes schmidt_decompose(const Eigen::MatrixXcd& amplitude,
                                      const FrequencyGrid& grid) {
  if (!amplitude.allFinite()) throw NumericError("two-photon amplitude is not finite");
  const double dw = grid.step;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(dw * amplitude, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD of the two-photon amplitude failed");

  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index kept = 0;
  const double floor = s.size() > 0 ? kSchmidtTruncation * s[0] : 0.0;
  while (kept < s.size() && s[kept] > floor) ++kept;

  const double scale = 1.0 / std::sqrt(dw);
  return {s.head(kept), scale * svd.matrixU().leftCols(kept),
          scale * svd.matrixV().leftCols(kept).conjugate(), grid};
}

inline SchmidtModes schmidt_decompose(const TwoPhotonAmplitude& amplitude,
                                      const FrequencyGrid& grid) {
  return schmidt_decompose(amplitude.values, grid);
}

/// Closed-form Bogoliubov transform of the spatially averaged model:
///   E_a = I + sum_k psi_k (cosh r_k - 1) psi_k^dagger dw
///   F_a = i sum_k psi_k sinh r_k phi_k^T dw
///   E_b = I + sum_k phi_k (cosh r_k - 1) phi_k^dagger dw
///   F_b = i sum_k phi_k sinh r_k psi_k^T dw
/// with r_k = gain * length * s_k.
inline BogoliubovTensors averaged_bogoliubov(const SchmidtModes& modes, double gain,
                                             double length) {
  if (!(gain >= 0.0)) throw ConfigError("gain must be non-negative");
  const double dw = modes.grid.step;
  const Eigen::ArrayXd r = gain * length * modes.singular_values.array();
  const Eigen::VectorXd ch = (r.cosh() - 1.0).matrix();
  const Eigen::VectorXd sh = r.sinh().matrix();
  const std::complex<double> i(0.0, 1.0);

  auto t = BogoliubovTensors::vacuum(modes.grid, gain);
  t.z = length;
  t.ea += dw * modes.left * ch.asDiagonal() * modes.left.adjoint();
  t.eb += dw * modes.right * ch.asDiagonal() * modes.right.adjoint();
  t.fa = (i * dw) * modes.left * sh.asDiagonal() * modes.right.transpose();
  t.fb = (i * dw) * modes.right * sh.asDiagonal() * modes.left.transpose();
  return t;
}

/// N = sum_k sinh^2(gain * length * s_k).
inline double averaged_photons(const SchmidtModes& modes, double gain, double length) {
  double n = 0.0;
  for (Eigen::Index k = 0; k < modes.count(); ++k) {
    const double sh = std::sinh(gain * length * modes.singular_values[k]);
    n += sh * sh;
  }
  return n;
}

/// Direct RK4 integration of the averaged equations with the z-independent
/// coupling delta_omega * TPA_L.
inline BogoliubovTensors averaged_propagate_ode(const CouplingField& field, double gain,
                                                double length,
                                                const SolverSettings& settings = {}) {
  const int steps = resolved_steps(settings, length);
  const TwoPhotonAmplitude amplitude = tpa(field, length);
  const double dw = field.grid().step;
  return detail::propagate_with(
      [&](double, Eigen::MatrixXcd& k) { k = dw * amplitude.values; }, true,
      field.band_halfwidth(), field.grid(), gain, length, steps);
}

inline BogoliubovTensors averaged_propagate_ode(const CouplingField& field, double gain,
                                                const SolverSettings& settings = {}) {
  return averaged_propagate_ode(field, gain, field.length(), settings);
}

}  // namespace hgpdc
