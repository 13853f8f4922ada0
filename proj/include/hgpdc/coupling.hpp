#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Core>

#include "hgpdc/dispersion.hpp"
#include "hgpdc/grid.hpp"

namespace hgpdc {

/// sin(x) / x with the series branch 1 - x^2/6 for |x| < 1e-8.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

/// Pump spectrum below this value is treated as exactly zero, which turns the
/// coupling matrix into an anti-diagonal band.
inline constexpr double kDefaultBandCutoff = 1e-20;

/// Pump and mismatch matrices on a grid, computed once per configuration.
///
/// Entry [j, k] belongs to signal detuning Omega_j and idler detuning Omega_k.
/// Only the phase exp(i dk z) depends on the propagation distance.
class CouplingField {
 public:
  CouplingField(FrequencyGrid grid, PumpParams pump, Dispersion dispersion,
                double band_cutoff = kDefaultBandCutoff)
      : grid_(grid), pump_(pump), dispersion_(std::move(dispersion)) {
    validate(pump_);
    validate_band(dispersion_, grid_);
    const int m = grid_.size;
    pump_matrix_.resize(m, m);
    mismatch_.resize(m, m);
    halfwidth_ = 0;
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j < m; ++j) {
        const int offset = j + k - (m - 1);
        // Omega_j + Omega_k is exactly offset * step on the symmetric grid.
        double s = pump_.continuous_wave ? (offset == 0 ? 1.0 : 0.0)
                                         : pump_amplitude(pump_, offset * grid_.step);
        if (s < band_cutoff) s = 0.0;
        if (s > 0.0) halfwidth_ = std::max(halfwidth_, std::abs(offset));
        pump_matrix_(j, k) = s;
        mismatch_(j, k) = delta_k(dispersion_, grid_.detuning(j), grid_.detuning(k));
      }
    }
    scaled_pump_ = grid_.step * pump_matrix_;
  }

  const FrequencyGrid& grid() const { return grid_; }
  const PumpParams& pump() const { return pump_; }
  const Dispersion& dispersion() const { return dispersion_; }
  double length() const { return length_mm(dispersion_); }

  const Eigen::MatrixXd& pump_matrix() const { return pump_matrix_; }
  const Eigen::MatrixXd& mismatch() const { return mismatch_; }

  /// Largest |j + k - (M - 1)| with non-zero pump amplitude.
  int band_halfwidth() const { return halfwidth_; }

  /// max |dk| over entries whose pump amplitude is at least `floor`.
  double max_mismatch(double floor) const {
    double out = 0.0;
    for (Eigen::Index k = 0; k < mismatch_.cols(); ++k)
      for (Eigen::Index j = 0; j < mismatch_.rows(); ++j)
        if (pump_matrix_(j, k) >= floor) out = std::max(out, std::abs(mismatch_(j, k)));
    return out;
  }

  /// Writes delta_omega * J(z) into `out`; entries outside the band are zero.
  void scaled_coupling(double z, Eigen::MatrixXcd& out) const {
    const int m = grid_.size;
    if (out.rows() != m || out.cols() != m) out.setZero(m, m);
    for (int k = 0; k < m; ++k) {
      const int lo = std::max(0, m - 1 - k - halfwidth_);
      const int hi = std::min(m - 1, m - 1 - k + halfwidth_);
      for (int j = lo; j <= hi; ++j)
        out(j, k) = std::polar(scaled_pump_(j, k), mismatch_(j, k) * z);
    }
  }

 private:
  FrequencyGrid grid_;
  PumpParams pump_;
  Dispersion dispersion_;
  Eigen::MatrixXd pump_matrix_;
  Eigen::MatrixXd scaled_pump_;
  Eigen::MatrixXd mismatch_;
  int halfwidth_ = 0;
};

/// J[j, k] = S(Omega_j + Omega_k) exp(i dk(Omega_j, Omega_k) z).
struct CouplingMatrix {
  Eigen::MatrixXcd values;
  double z = 0.0;
};

inline CouplingMatrix coupling_at(const CouplingField& field, double z) {
  const Eigen::MatrixXd& s = field.pump_matrix();
  const Eigen::MatrixXd& dk = field.mismatch();
  CouplingMatrix j{Eigen::MatrixXcd(s.rows(), s.cols()), z};
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    for (Eigen::Index r = 0; r < s.rows(); ++r) j.values(r, c) = std::polar(s(r, c), dk(r, c) * z);
  return j;
}

/// Spatially averaged coupling S sinc(dk L / 2) exp(i dk L / 2).
struct TwoPhotonAmplitude {
  Eigen::MatrixXcd values;
  double length_mm = 0.0;
};

inline TwoPhotonAmplitude tpa(const CouplingField& field, double length) {
  if (!(length > 0.0)) throw ConfigError("tpa length must be positive");
  const Eigen::MatrixXd& s = field.pump_matrix();
  const Eigen::MatrixXd& dk = field.mismatch();
  TwoPhotonAmplitude t{Eigen::MatrixXcd(s.rows(), s.cols()), length};
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double half_phase = 0.5 * dk(r, c) * length;
      t.values(r, c) = s(r, c) * sinc(half_phase) * std::polar(1.0, half_phase);
    }
  }
  return t;
}

inline TwoPhotonAmplitude tpa(const CouplingField& field) { return tpa(field, field.length()); }

}  // namespace hgpdc
