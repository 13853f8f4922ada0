#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "hgpdc/errors.hpp"

namespace hgpdc {

/// Speed of light in mm/fs. All lengths are mm, times fs, frequencies rad/fs.
inline constexpr double kSpeedOfLight = 2.99792458e-4;

/// Converts a vacuum wavelength in micrometres to angular frequency in rad/fs.
inline double angular_frequency_from_um(double wavelength_um) {
  return 2.0 * std::numbers::pi * kSpeedOfLight / (wavelength_um * 1e-3);
}

inline double wavelength_um_from_angular(double omega) {
  return 2.0 * std::numbers::pi * kSpeedOfLight / omega * 1e3;
}

/// Symmetric frequency axis shared by the signal and idler fields.
///
/// Point j sits at omega_j = center + (j - (size - 1) / 2) * step. The size is
/// odd so that zero detuning is a grid point.
struct FrequencyGrid {
  double center = 0.0;  ///< half the pump frequency [rad/fs]
  double step = 0.0;    ///< delta omega [rad/fs]
  int size = 0;

  int center_index() const { return (size - 1) / 2; }
  double detuning(int j) const { return (j - center_index()) * step; }
  double frequency(int j) const { return center + detuning(j); }
  double span() const { return (size - 1) * step; }

  Eigen::VectorXd detunings() const {
    Eigen::VectorXd axis(size);
    for (int j = 0; j < size; ++j) axis[j] = detuning(j);
    return axis;
  }
};

struct PumpParams {
  double wavelength_um = 0.775;
  double duration_fs = 80.0;
  /// Continuous-wave limit: the pump spectrum becomes a Kronecker delta on
  /// the anti-diagonal Omega_s + Omega_i = 0.
  bool continuous_wave = false;

  double frequency() const { return angular_frequency_from_um(wavelength_um); }
};

inline void validate(const PumpParams& pump) {
  if (!(pump.wavelength_um > 0.0) || !std::isfinite(pump.wavelength_um))
    throw ConfigError("pump wavelength must be positive");
  if (!pump.continuous_wave &&
      (!(pump.duration_fs > 0.0) || !std::isfinite(pump.duration_fs)))
    throw ConfigError("pump duration must be positive");
}

inline FrequencyGrid build_grid(double pump_wavelength_um, double step, int size) {
  if (size < 3 || size % 2 == 0)
    throw ConfigError("grid size must be odd and at least 3");
  if (!(step > 0.0) || !std::isfinite(step))
    throw ConfigError("grid step must be positive");
  if (!(pump_wavelength_um > 0.0))
    throw ConfigError("pump wavelength must be positive");
  return FrequencyGrid{0.5 * angular_frequency_from_um(pump_wavelength_um), step, size};
}

/// Gaussian pump spectral amplitude S(Omega) = exp(-tau^2 Omega^2 / 2).
///
/// Omega = 1/tau is the 1/e half-width of the amplitude; the amplitude FWHM is
/// 2 sqrt(2 ln 2) / tau. In the continuous-wave limit this returns 1 at zero
/// detuning and 0 elsewhere.
inline double pump_amplitude(const PumpParams& pump, double omega_sum) {
  if (pump.continuous_wave) return omega_sum == 0.0 ? 1.0 : 0.0;
  const double x = pump.duration_fs * omega_sum;
  return std::exp(-0.5 * x * x);
}

/// Full width at half maximum of |S| (not |S|^2).
inline double pump_amplitude_fwhm(const PumpParams& pump) {
  if (pump.continuous_wave) return 0.0;
  return 2.0 * std::sqrt(2.0 * std::numbers::ln2) / pump.duration_fs;
}

}  // namespace hgpdc
