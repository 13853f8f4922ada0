#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "hgpdc/averaged.hpp"
#include "hgpdc/coupling.hpp"
#include "hgpdc/errors.hpp"
#include "hgpdc/solver.hpp"

namespace hgpdc {

struct GainCalibration {
  double gain = 0.0;
  double photons = 0.0;   ///< N reached at `gain`
  int evaluations = 0;    ///< full-resolution propagations
  int coarse_evaluations = 0;
  /// Rigorous solution at `gain`, kept from the final evaluation.
  std::optional<BogoliubovTensors> tensors;
};

inline constexpr double kMinGain = 1e-6;
inline constexpr double kDefaultMaxGain = 1e4;
inline constexpr double kCalibrationTolerance = 1e-3;

namespace detail {

/// Root of a monotone increasing f(x) by safeguarded secant steps.
///
/// f may return +inf (for example when the solver diverged). Returns the last
/// x with |f(x)| <= tol; throws CalibrationError if no bracket exists inside
/// [x_min, x_max].
inline double solve_monotone(const std::function<double(double)>& f, double x0, double slope0,
                             double tol, double x_min, double x_max, int max_evals,
                             int& evals) {
  const double inf = std::numeric_limits<double>::infinity();
  double lo = x_min, hi = x_max;
  double f_lo = -inf, f_hi = inf;
  bool have_lo = false, have_hi = false;

  double x = std::clamp(x0, x_min, x_max);
  double slope = slope0 > 0.0 ? slope0 : 2.0;
  double prev_x = 0.0, prev_f = 0.0;
  bool have_prev = false;

  for (evals = 0; evals < max_evals;) {
    const double fx = f(x);
    ++evals;
    if (std::isfinite(fx) && std::abs(fx) <= tol) return x;

    if (fx < 0.0) {
      lo = x, f_lo = fx, have_lo = true;
    } else {
      hi = x, f_hi = fx, have_hi = true;
    }
    if (std::isfinite(fx) && have_prev && std::isfinite(prev_f) && x != prev_x) {
      const double s = (fx - prev_f) / (x - prev_x);
      if (s > 0.0) slope = s;
    }
    if (std::isfinite(fx)) {
      prev_x = x, prev_f = fx, have_prev = true;
    }

    double next;
    if (!std::isfinite(fx)) {
      next = have_lo ? 0.5 * (lo + x) : x - 1.0;
    } else {
      next = x - fx / slope;
    }
    if (have_lo && have_hi) {
      const double width = hi - lo;
      if (!(next > lo + 1e-3 * width && next < hi - 1e-3 * width)) {
        // Regula falsi on the bracket, bisection if one end is infinite.
        next = std::isfinite(f_lo) && std::isfinite(f_hi) ? lo - f_lo * width / (f_hi - f_lo)
                                                          : 0.5 * (lo + hi);
        if (!(next > lo + 1e-3 * width && next < hi - 1e-3 * width)) next = 0.5 * (lo + hi);
      }
    } else if (have_lo) {
      next = std::clamp(next, x + 1e-3, x + 3.0);
      if (x >= x_max) throw CalibrationError("target not reached at the maximum gain");
      next = std::min(next, x_max);
    } else {
      next = std::clamp(next, x - 3.0, x - 1e-3);
      if (x <= x_min) throw CalibrationError("target exceeded at the minimum gain");
      next = std::max(next, x_min);
    }
    x = next;
  }
  throw CalibrationError("gain calibration did not converge in " + std::to_string(max_evals) +
                         " propagations");
}

}  // namespace detail

/// Gain giving N = target in the closed-form averaged model.
inline double averaged_gain_for(const SchmidtModes& modes, double length, double target) {
  if (!(target > 0.0)) throw ConfigError("target photon number must be positive");
  if (modes.count() == 0) throw CalibrationError("two-photon amplitude vanishes");
  double lo = 0.0, hi = 1.0 / (length * modes.singular_values[0]);
  while (averaged_photons(modes, hi, length) < target) {
    hi *= 2.0;
    if (hi > 1e300) throw CalibrationError("averaged-model bracket not found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (averaged_photons(modes, mid, length) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// d ln N / d ln gain of the averaged model.
inline double averaged_log_slope(const SchmidtModes& modes, double gain, double length) {
  double n = 0.0, dn = 0.0;
  for (Eigen::Index k = 0; k < modes.count(); ++k) {
    const double r = gain * length * modes.singular_values[k];
    n += std::sinh(r) * std::sinh(r);
    dn += r * std::sinh(2.0 * r);  // gain * dN/dgain
  }
  return n > 0.0 ? dn / n : 2.0;
}

inline GainCalibration calibrate_averaged_gain(double target, const SchmidtModes& modes,
                                               double length) {
  const double gain = averaged_gain_for(modes, length, target);
  return {gain, averaged_photons(modes, gain, length), 0, 0};
}

/// Gain such that the rigorous model produces |N - target| / target <= tol.
///
/// Starts from the averaged-model estimate, refines with a quarter-resolution
/// solver, then finishes at full resolution. N is monotone in the gain.
inline GainCalibration calibrate_gain(double target, const CouplingField& field,
                                      const SolverSettings& settings = {},
                                      double max_gain = kDefaultMaxGain,
                                      double tol = kCalibrationTolerance) {
  if (!(target > 0.0)) throw ConfigError("target photon number must be positive");
  const double length = field.length();
  const int steps = resolved_steps(settings, field);
  const SchmidtModes modes = schmidt_decompose(tpa(field), field.grid());
  if (modes.count() == 0) throw CalibrationError("coupling vanishes on the grid");

  const double log_target = std::log(target);
  const double x_min = std::log(kMinGain), x_max = std::log(max_gain);
  double x = std::log(std::clamp(averaged_gain_for(modes, length, target), kMinGain, max_gain));
  double slope = averaged_log_slope(modes, std::exp(x), length);

  std::optional<BogoliubovTensors> last;
  auto residual = [&](int n_steps, double* last_photons) {
    return [&field, &settings, &last, log_target, n_steps, last_photons](double lx) {
      SolverSettings s = settings;
      s.steps = n_steps;
      try {
        last = propagate(field, std::exp(lx), s);
        *last_photons = signal_photons(*last);
      } catch (const DivergedError&) {
        last.reset();
        return std::numeric_limits<double>::infinity();
      }
      return *last_photons > 0.0 ? std::log(*last_photons) - log_target
                                 : -std::numeric_limits<double>::infinity();
    };
  };

  GainCalibration out;
  double photons = 0.0;
  const int coarse_steps = std::max(16, steps / 4);
  if (target > 1.0 && coarse_steps < steps) {
    int evals = 0;
    x = detail::solve_monotone(residual(coarse_steps, &photons), x, slope, 1e-2, x_min, x_max,
                               60, evals);
    out.coarse_evaluations = evals;
    slope = std::max(slope, 1e-3);
  }
  int evals = 0;
  const double log_tol = 0.5 * std::log1p(tol);
  x = detail::solve_monotone(residual(steps, &photons), x, slope, log_tol, x_min, x_max, 60,
                             evals);
  out.evaluations = evals;
  out.gain = std::exp(x);
  out.photons = photons;
  out.tensors = std::move(last);
  return out;
}

}  // namespace hgpdc
