#pragma once

#include <algorithm>
#include <array>
#include <numbers>
#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "hgpdc/errors.hpp"
#include "hgpdc/grid.hpp"

namespace hgpdc {

/// Second-order Taylor model of the wavevector mismatch around degeneracy.
///
/// alpha_{s,i} = 1/v_p - 1/v_{s,i} in fs/mm; beta_{p,s,i} are the group-velocity
/// dispersions in fs^2/mm. The zero-order mismatch is removed, so
/// delta_k(0, 0) == 0 by construction.
struct TaylorDispersion {
  double alpha_s = 0.0;
  double alpha_i = 0.0;
  double beta_p = 0.0;
  double beta_s = 0.0;
  double beta_i = 0.0;
  double length_mm = 10.0;

  double linear_term(double omega_s, double omega_i) const {
    return alpha_s * omega_s + alpha_i * omega_i;
  }
  double quadratic_term(double omega_s, double omega_i) const {
    const double sum = omega_s + omega_i;
    return 0.5 * (beta_p * sum * sum - beta_s * omega_s * omega_s - beta_i * omega_i * omega_i);
  }
  double delta_k(double omega_s, double omega_i) const {
    return linear_term(omega_s, omega_i) + quadratic_term(omega_s, omega_i);
  }
};

/// n^2(lambda) = a + b1 / (lambda^2 - c1) + b2 / (lambda^2 - c2), lambda in um.
struct SellmeierCoefficients {
  double a = 1.0;
  double b1 = 0.0;
  double c1 = 0.0;
  double b2 = 0.0;
  double c2 = 0.0;

  double index_squared(double lambda_um) const {
    const double l2 = lambda_um * lambda_um;
    return a + b1 / (l2 - c1) + b2 / (l2 - c2);
  }
  double index(double lambda_um) const { return std::sqrt(index_squared(lambda_um)); }
};

/// KTP principal-axis coefficients (y and z axes, labelled beta and gamma).
inline constexpr SellmeierCoefficients kKtpBeta{3.45018, 0.04341, 0.04597, 16.98825, 39.43799};
inline constexpr SellmeierCoefficients kKtpGamma{4.59423, 0.06206, 0.04763, 110.80672, 86.12171};

/// k(omega) and its first two derivatives with respect to angular frequency.
struct WavevectorDerivatives {
  double k = 0.0;   ///< [1/mm]
  double k1 = 0.0;  ///< inverse group velocity [fs/mm]
  double k2 = 0.0;  ///< group-velocity dispersion [fs^2/mm]
};

/// k(omega) = n(lambda(omega)) * omega / c.
inline double wavevector(const SellmeierCoefficients& medium, double omega) {
  return medium.index(wavelength_um_from_angular(omega)) * omega / kSpeedOfLight;
}

/// Closed-form derivatives of k(omega) through the chain rule on lambda = A / omega.
inline WavevectorDerivatives wavevector_derivatives(const SellmeierCoefficients& medium,
                                                    double omega) {
  const double lambda = wavelength_um_from_angular(omega);
  const double l2 = lambda * lambda;
  double f = medium.a, df = 0.0, d2f = 0.0;
  for (const auto [b, c] : std::array<std::array<double, 2>, 2>{
           {{medium.b1, medium.c1}, {medium.b2, medium.c2}}}) {
    const double d = l2 - c;
    f += b / d;
    df += -2.0 * b * lambda / (d * d);
    d2f += b * (6.0 * l2 + 2.0 * c) / (d * d * d);
  }
  const double n = std::sqrt(f);
  const double dn = df / (2.0 * n);
  const double d2n = d2f / (2.0 * n) - df * df / (4.0 * n * n * n);

  const double dlambda = -lambda / omega;
  const double d2lambda = 2.0 * lambda / (omega * omega);
  const double dn_domega = dn * dlambda;
  const double d2n_domega2 = d2n * dlambda * dlambda + dn * d2lambda;

  return {n * omega / kSpeedOfLight, (n + omega * dn_domega) / kSpeedOfLight,
          (2.0 * dn_domega + omega * d2n_domega2) / kSpeedOfLight};
}

/// Fourth-order central differences of k(omega); used as a cross-check of the
/// closed form and as the reduction method on request.
inline WavevectorDerivatives wavevector_derivatives_fd(const SellmeierCoefficients& medium,
                                                       double omega, double h = 1e-2) {
  const double m2 = wavevector(medium, omega - 2 * h);
  const double m1 = wavevector(medium, omega - h);
  const double p0 = wavevector(medium, omega);
  const double p1 = wavevector(medium, omega + h);
  const double p2 = wavevector(medium, omega + 2 * h);
  return {p0, (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h),
          (-m2 + 16 * m1 - 30 * p0 + 16 * p1 - p2) / (12 * h * h)};
}

enum class DerivativeMethod { analytic, finite_difference };

/// Full-dispersion waveguide built from Sellmeier media for the pump, signal
/// and idler. The quasi-phase-matching wavevector is calibrated so that the
/// mismatch vanishes exactly at degeneracy.
class SellmeierDispersion {
 public:
  SellmeierDispersion() = default;
  SellmeierDispersion(SellmeierCoefficients pump, SellmeierCoefficients signal,
                      SellmeierCoefficients idler, double pump_wavelength_um,
                      double length_mm, double nominal_poling_period_um = 0.0,
                      bool taylor_mode = false)
      : pump_(pump),
        signal_(signal),
        idler_(idler),
        pump_wavelength_um_(pump_wavelength_um),
        length_mm_(length_mm),
        nominal_poling_period_um_(nominal_poling_period_um),
        taylor_mode_(taylor_mode) {
    if (!(length_mm > 0.0)) throw ConfigError("waveguide length must be positive");
    if (!(pump_wavelength_um > 0.0)) throw ConfigError("pump wavelength must be positive");
    pump_omega_ = angular_frequency_from_um(pump_wavelength_um);
    half_omega_ = 0.5 * pump_omega_;
    for (const auto* medium : {&pump_, &signal_, &idler_}) {
      const double omega = medium == &pump_ ? pump_omega_ : half_omega_;
      if (!(medium->index_squared(wavelength_um_from_angular(omega)) > 1.0))
        throw ConfigError("Sellmeier index must be real and above 1 at the design wavelengths");
    }
    k_qpm_ = wavevector(pump_, pump_omega_) - wavevector(signal_, half_omega_) -
             wavevector(idler_, half_omega_);
    taylor_ = to_taylor();
  }

  const SellmeierCoefficients& pump() const { return pump_; }
  const SellmeierCoefficients& signal() const { return signal_; }
  const SellmeierCoefficients& idler() const { return idler_; }
  double pump_wavelength_um() const { return pump_wavelength_um_; }
  double length_mm() const { return length_mm_; }
  double nominal_poling_period_um() const { return nominal_poling_period_um_; }
  bool taylor_mode() const { return taylor_mode_; }
  double pump_frequency() const { return pump_omega_; }

  /// Calibrated QPM wavevector [1/mm] and the equivalent poling period [um].
  double k_qpm() const { return k_qpm_; }
  double equivalent_poling_period_um() const { return 2.0 * std::numbers::pi / k_qpm_ * 1e3; }

  /// Mismatch from the full k(omega), exact zero at the origin.
  double full_delta_k(double omega_s, double omega_i) const {
    return wavevector(pump_, pump_omega_ + omega_s + omega_i) -
           wavevector(signal_, half_omega_ + omega_s) -
           wavevector(idler_, half_omega_ + omega_i) - k_qpm_;
  }

  TaylorDispersion to_taylor(DerivativeMethod method = DerivativeMethod::analytic) const {
    auto eval = [method](const SellmeierCoefficients& m, double omega) {
      return method == DerivativeMethod::analytic ? wavevector_derivatives(m, omega)
                                                  : wavevector_derivatives_fd(m, omega);
    };
    const auto p = eval(pump_, pump_omega_);
    const auto s = eval(signal_, half_omega_);
    const auto i = eval(idler_, half_omega_);
    return {p.k1 - s.k1, p.k1 - i.k1, p.k2, s.k2, i.k2, length_mm_};
  }

  double delta_k(double omega_s, double omega_i) const {
    return taylor_mode_ ? taylor_.delta_k(omega_s, omega_i) : full_delta_k(omega_s, omega_i);
  }

 private:
  SellmeierCoefficients pump_{}, signal_{}, idler_{};
  double pump_wavelength_um_ = 0.775;
  double length_mm_ = 1.0;
  double nominal_poling_period_um_ = 0.0;
  bool taylor_mode_ = false;
  double pump_omega_ = 0.0;
  double half_omega_ = 0.0;
  double k_qpm_ = 0.0;
  TaylorDispersion taylor_{};
};

/// Type-II PPKTP waveguide: pump on gamma, signal on beta, idler on gamma.
/// This assignment gives alpha_s >= alpha_i.
inline SellmeierDispersion ppktp_waveguide(double length_mm = 1.0,
                                           double pump_wavelength_um = 0.775,
                                           bool taylor_mode = false) {
  return SellmeierDispersion(kKtpGamma, kKtpBeta, kKtpGamma, pump_wavelength_um, length_mm,
                             10.8, taylor_mode);
}

using Dispersion = std::variant<TaylorDispersion, SellmeierDispersion>;

inline double delta_k(const Dispersion& dispersion, double omega_s, double omega_i) {
  return std::visit([&](const auto& d) { return d.delta_k(omega_s, omega_i); }, dispersion);
}

inline double length_mm(const Dispersion& dispersion) {
  if (const auto* t = std::get_if<TaylorDispersion>(&dispersion)) return t->length_mm;
  return std::get<SellmeierDispersion>(dispersion).length_mm();
}

/// Taylor coefficients of any dispersion model (identity for the Taylor case).
inline TaylorDispersion taylor_parameters(const Dispersion& dispersion) {
  if (const auto* t = std::get_if<TaylorDispersion>(&dispersion)) return *t;
  return std::get<SellmeierDispersion>(dispersion).to_taylor();
}

inline TaylorDispersion sellmeier_to_taylor(const SellmeierDispersion& sellmeier,
                                            DerivativeMethod method = DerivativeMethod::analytic) {
  return sellmeier.to_taylor(method);
}

/// Signed curvature [fs] of the zero-mismatch curve at the origin.
inline double curvature(const TaylorDispersion& d) {
  const double norm2 = d.alpha_s * d.alpha_s + d.alpha_i * d.alpha_i;
  if (norm2 == 0.0)
    throw NumericError("curvature undefined: alpha_s = alpha_i = 0 (degenerate dispersion)");
  const double numerator = d.alpha_i * d.alpha_i * (d.beta_p - d.beta_s) -
                           2.0 * d.alpha_s * d.alpha_i * d.beta_p +
                           d.alpha_s * d.alpha_s * (d.beta_p - d.beta_i);
  return numerator / (norm2 * std::sqrt(norm2));
}

inline double curvature(const Dispersion& dispersion) {
  return curvature(taylor_parameters(dispersion));
}

struct CharacteristicTimes {
  double tau1 = 0.0;       ///< group delay |alpha_s - alpha_i| L [fs]
  double tau2 = 0.0;       ///< |kappa| [fs]
  double curvature = 0.0;  ///< signed kappa [fs]
};

inline CharacteristicTimes characteristic_times(const TaylorDispersion& d) {
  if (!(d.length_mm > 0.0)) throw ConfigError("waveguide length must be positive");
  const double kappa = curvature(d);
  return {std::abs(d.alpha_s - d.alpha_i) * d.length_mm, std::abs(kappa), kappa};
}

inline CharacteristicTimes characteristic_times(const Dispersion& dispersion) {
  return characteristic_times(taylor_parameters(dispersion));
}

inline void validate(const TaylorDispersion& d) {
  if (!(d.length_mm > 0.0)) throw ConfigError("waveguide length must be positive");
  for (double v : {d.alpha_s, d.alpha_i, d.beta_p, d.beta_s, d.beta_i})
    if (!std::isfinite(v)) throw ConfigError("dispersion parameters must be finite");
}

namespace detail {

/// Rejects Sellmeier media with a pole or a non-physical index inside [lo, hi].
inline void check_medium_band(const SellmeierCoefficients& m, double omega_lo, double omega_hi,
                              const char* which) {
  if (!(omega_lo > 0.0))
    throw ConfigError(std::string("frequency band of the ") + which +
                      " reaches non-positive frequencies");
  const double l_hi = wavelength_um_from_angular(omega_lo);
  const double l_lo = wavelength_um_from_angular(omega_hi);
  for (double c : {m.c1, m.c2}) {
    if ((l_lo * l_lo - c) * (l_hi * l_hi - c) <= 0.0)
      throw ConfigError(std::string("Sellmeier pole inside the ") + which + " band");
  }
  constexpr int kSamples = 64;
  for (int s = 0; s <= kSamples; ++s) {
    const double lambda = l_lo + (l_hi - l_lo) * s / kSamples;
    const double n2 = m.index_squared(lambda);
    if (!std::isfinite(n2) || !(n2 > 1.0))
      throw ConfigError(std::string("Sellmeier index not above 1 in the ") + which + " band");
  }
}

}  // namespace detail

/// Checks that the dispersion model is well defined over the grid band.
inline void validate_band(const Dispersion& dispersion, const FrequencyGrid& grid) {
  if (const auto* t = std::get_if<TaylorDispersion>(&dispersion)) {
    validate(*t);
    return;
  }
  const auto& s = std::get<SellmeierDispersion>(dispersion);
  const double half = 0.5 * grid.span();
  const double pump_center = s.pump_frequency();
  detail::check_medium_band(s.pump(), pump_center - 2 * half, pump_center + 2 * half, "pump");
  detail::check_medium_band(s.signal(), 0.5 * pump_center - half, 0.5 * pump_center + half,
                            "signal");
  detail::check_medium_band(s.idler(), 0.5 * pump_center - half, 0.5 * pump_center + half,
                            "idler");
}

}  // namespace hgpdc
