#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "hgpdc/errors.hpp"
#include "hgpdc/grid.hpp"
#include "hgpdc/solver.hpp"

namespace hgpdc {

/// Photon-number spectral densities [photons / (rad/fs)] and total photons.
struct SpectralResult {
  Eigen::VectorXd signal;
  Eigen::VectorXd idler;
  double photons = 0.0;         ///< N = N_s
  double idler_photons = 0.0;   ///< N_i, equal to N up to integration error
  double asymmetry = 0.0;       ///< |N_s - N_i| / N
  FrequencyGrid grid;
};

inline SpectralResult spectra(const BogoliubovTensors& t) {
  const double dw = t.grid.step;
  SpectralResult r;
  r.grid = t.grid;
  r.signal = t.fa.rowwise().squaredNorm() / dw;
  r.idler = t.fb.rowwise().squaredNorm() / dw;
  r.photons = dw * r.signal.sum();
  r.idler_photons = dw * r.idler.sum();
  r.asymmetry = r.photons > 0.0 ? std::abs(r.photons - r.idler_photons) / r.photons : 0.0;
  return r;
}

struct JsiResult {
  Eigen::MatrixXd values;        ///< [signal j, idler k]
  double imaginary_residual = 0.0;  ///< max |Im| / max |Re|
};

/// Joint spectral intensity <n_s n_i> - <n_s><n_i>.
inline JsiResult jsi(const BogoliubovTensors& t) {
  const double dw = t.grid.step;
  const Eigen::MatrixXcd left = t.fa.conjugate() * t.eb.adjoint();
  const Eigen::MatrixXcd right = t.ea * t.fb.transpose();
  const Eigen::MatrixXcd full = left.cwiseProduct(right) / (dw * dw);
  JsiResult r{full.real(), 0.0};
  const double re = r.values.cwiseAbs().maxCoeff();
  r.imaginary_residual = re > 0.0 ? full.imag().cwiseAbs().maxCoeff() / re : 0.0;
  return r;
}

/// Relative JSI imaginary residual above which a warning is raised.
inline constexpr double kJsiImaginaryWarning = 1e-4;

/// Bins below or at this fraction of the maximum are dropped before moments.
inline constexpr double kTrimFraction = 0.005;

inline Eigen::VectorXd trim(const Eigen::VectorXd& spectrum, double fraction = kTrimFraction) {
  if (spectrum.size() == 0) throw EmptySpectrumError("empty spectrum");
  const double peak = spectrum.maxCoeff();
  if (!(peak > 0.0)) throw EmptySpectrumError("spectrum has no positive values");
  const double threshold = fraction * peak;
  return spectrum.unaryExpr([threshold](double v) { return v > threshold ? v : 0.0; });
}

struct SpectralMoments {
  double mean = 0.0;    ///< detuning [rad/fs]
  double stddev = 0.0;  ///< [rad/fs]
};

/// Weighted mean and standard deviation over the detuning axis.
inline SpectralMoments moments(const FrequencyGrid& grid, const Eigen::VectorXd& spectrum) {
  const Eigen::VectorXd axis = grid.detunings();
  const double total = spectrum.sum();
  if (!(total > 0.0)) throw EmptySpectrumError("spectrum has zero weight");
  const double mean = axis.dot(spectrum) / total;
  const double var = (axis.array() - mean).square().matrix().dot(spectrum) / total;
  return {mean, std::sqrt(std::max(var, 0.0))};
}

inline SpectralMoments trimmed_moments(const FrequencyGrid& grid,
                                       const Eigen::VectorXd& spectrum) {
  return moments(grid, trim(spectrum));
}

/// Relative spectral distance |mean_s - mean_i| / max(sigma_s, sigma_i) on
/// trimmed spectra.
inline double rsd(const FrequencyGrid& grid, const Eigen::VectorXd& signal,
                  const Eigen::VectorXd& idler) {
  const auto s = trimmed_moments(grid, signal);
  const auto i = trimmed_moments(grid, idler);
  const double width = std::max(s.stddev, i.stddev);
  if (!(width > 0.0)) throw DegenerateSpectrumError("zero spectral width in RSD");
  return std::abs(s.mean - i.mean) / width;
}

/// Normalized zero-lag cross-correlation of two spectra, in [0, 1].
inline double overlap(const Eigen::VectorXd& signal, const Eigen::VectorXd& idler) {
  const double ns = signal.norm();
  const double ni = idler.norm();
  if (!(ns > 0.0) || !(ni > 0.0)) throw EmptySpectrumError("zero-norm spectrum in overlap");
  return signal.dot(idler) / (ns * ni);
}

/// Distance between the outermost linearly interpolated half-maximum crossings.
inline double fwhm(const FrequencyGrid& grid, const Eigen::VectorXd& spectrum) {
  const Eigen::Index m = spectrum.size();
  if (m == 0) throw EmptySpectrumError("empty spectrum");
  const double half = 0.5 * spectrum.maxCoeff();
  if (!(half > 0.0)) throw EmptySpectrumError("spectrum has no positive maximum");
  Eigen::Index lo = 0;
  while (spectrum[lo] < half) ++lo;
  Eigen::Index hi = m - 1;
  while (spectrum[hi] < half) --hi;
  if (lo == 0 || hi == m - 1)
    throw WidthExceedsGridError("half maximum not bracketed inside the grid");
  auto crossing = [&](Eigen::Index below, Eigen::Index above) {
    const double x0 = grid.detuning(static_cast<int>(below));
    const double x1 = grid.detuning(static_cast<int>(above));
    const double y0 = spectrum[below], y1 = spectrum[above];
    return x0 + (half - y0) * (x1 - x0) / (y1 - y0);
  };
  return crossing(hi + 1, hi) - crossing(lo - 1, lo);
}

struct MetricsRecord {
  double rsd = 0.0;
  double overlap = 0.0;
  double fwhm_signal = 0.0;
  double fwhm_idler = 0.0;
  double mean_signal = 0.0;   ///< trimmed mean detuning
  double mean_idler = 0.0;
  double sigma_signal = 0.0;  ///< trimmed standard deviation
  double sigma_idler = 0.0;
  double trim_fraction = kTrimFraction;
};

/// All scalar metrics of a spectral result. FWHM and overlap use untrimmed
/// spectra; RSD and the moments use trimmed ones. A FWHM that leaves the grid
/// is reported as NaN.
inline MetricsRecord metrics(const SpectralResult& r) {
  MetricsRecord m;
  const auto s = trimmed_moments(r.grid, r.signal);
  const auto i = trimmed_moments(r.grid, r.idler);
  m.mean_signal = s.mean;
  m.mean_idler = i.mean;
  m.sigma_signal = s.stddev;
  m.sigma_idler = i.stddev;
  m.rsd = rsd(r.grid, r.signal, r.idler);
  m.overlap = overlap(r.signal, r.idler);
  try {
    m.fwhm_signal = fwhm(r.grid, r.signal);
  } catch (const WidthExceedsGridError&) {
    m.fwhm_signal = std::nan("");
  }
  try {
    m.fwhm_idler = fwhm(r.grid, r.idler);
  } catch (const WidthExceedsGridError&) {
    m.fwhm_idler = std::nan("");
  }
  return m;
}

}  // namespace hgpdc
