#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "hgpdc/calibration.hpp"
#include "hgpdc/coupling.hpp"
#include "hgpdc/dispersion.hpp"
#include "hgpdc/observables.hpp"
#include "hgpdc/parallel.hpp"
#include "hgpdc/solver.hpp"

namespace hgpdc {

/// Counter-based generator: each draw is a pure function of (seed, stream,
/// counter) through the SplitMix64 finalizer, so results do not depend on
/// call order, thread count or platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    const std::uint64_t key = mix(seed_ ^ mix(stream + 0x632BE59BD9B4E019ULL));
    return mix(key + 0x9E3779B97F4A7C15ULL * (counter + 1));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t stream, std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(stream, counter);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Random-waveguide study definition. Screening bounds are in units of the
/// grid step delta_omega (lower bounds) and of the grid width M * delta_omega
/// (upper bounds).
struct SamplePlan {
  std::uint64_t seed = 20250101;
  int count = 50;
  int max_candidates = 200000;
  Range alpha_range{-35.0, 35.0};   ///< fs/mm
  Range beta_range{-350.0, 350.0};  ///< fs^2/mm
  bool beta_zero = false;

  double length_mm = 10.0;
  double pump_wavelength_um = 0.775;
  double pump_duration_fs = 80.0;
  double grid_step = 2.0 * std::numbers::pi * 0.36e-3;
  int grid_size = 255;

  double fwhm_min_steps = 4.0;
  double fwhm_max_fraction = 0.1;
  double correlation_min_steps = 2.5;
  double correlation_max_fraction = 0.3;
  double overlap_min = 0.96;  ///< applied only when beta_zero is false
  double rsd_max = 0.15;      ///< applied only when beta_zero is false

  std::vector<double> gain_ladder{1e-5, 1.0, 10.0, 1e3, 1e5};
  double landscape_photons = 10.0;

  SolverSettings solver{};
  int workers = 1;
};

inline void validate(const SamplePlan& plan) {
  if (plan.count < 0) throw ConfigError("sample count must be non-negative");
  if (plan.alpha_range.hi < plan.alpha_range.lo || plan.beta_range.hi < plan.beta_range.lo)
    throw ConfigError("sampling ranges must satisfy lo <= hi");
  if (plan.gain_ladder.empty()) throw ConfigError("gain ladder must not be empty");
  for (double n : plan.gain_ladder)
    if (!(n > 0.0)) throw ConfigError("gain ladder entries must be positive");
  if (plan.workers < 1) throw ConfigError("worker count must be at least 1");
  if (!(plan.length_mm > 0.0)) throw ConfigError("waveguide length must be positive");
}

inline FrequencyGrid plan_grid(const SamplePlan& plan) {
  return build_grid(plan.pump_wavelength_um, plan.grid_step, plan.grid_size);
}

inline PumpParams plan_pump(const SamplePlan& plan) {
  return {plan.pump_wavelength_um, plan.pump_duration_fs, false};
}

/// Candidate number `index`; draws are independent of every other index.
inline TaylorDispersion draw_candidate(const SamplePlan& plan, std::uint64_t index) {
  const CounterRng rng(plan.seed);
  TaylorDispersion d;
  d.alpha_s = rng.uniform(index, 0, plan.alpha_range.lo, plan.alpha_range.hi);
  d.alpha_i = rng.uniform(index, 1, plan.alpha_range.lo, plan.alpha_range.hi);
  if (!plan.beta_zero) {
    d.beta_p = rng.uniform(index, 2, plan.beta_range.lo, plan.beta_range.hi);
    d.beta_s = rng.uniform(index, 3, plan.beta_range.lo, plan.beta_range.hi);
    d.beta_i = rng.uniform(index, 4, plan.beta_range.lo, plan.beta_range.hi);
  }
  d.length_mm = plan.length_mm;
  return d;
}

/// Low-gain quantities derived from |TPA|^2 without solving the equations.
struct LowGainMetrics {
  double fwhm_signal = std::nan("");
  double fwhm_idler = std::nan("");
  double correlation_sigma_signal = std::nan("");  ///< width of JSI(Omega_s, 0)
  double correlation_sigma_idler = std::nan("");   ///< width of JSI(0, Omega_i)
  double overlap = std::nan("");
  double rsd = std::nan("");
};

struct ScreenResult {
  bool accepted = false;
  std::string reason;  ///< empty when accepted
  LowGainMetrics metrics;
};

/// Applies the screening predicates in order and reports the first failure.
inline ScreenResult screen_metrics(const LowGainMetrics& m, const SamplePlan& plan) {
  const double dw = plan.grid_step;
  const double width = plan.grid_size * dw;
  ScreenResult r{false, {}, m};
  auto reject = [&](const char* why) {
    r.reason = why;
    return r;
  };
  for (double f : {m.fwhm_signal, m.fwhm_idler}) {
    if (!std::isfinite(f) || f >= plan.fwhm_max_fraction * width) return reject("delocalized");
    if (f <= plan.fwhm_min_steps * dw) return reject("narrow");
  }
  for (double s : {m.correlation_sigma_signal, m.correlation_sigma_idler}) {
    if (!std::isfinite(s) || s <= plan.correlation_min_steps * dw) return reject("unresolved");
    if (s >= plan.correlation_max_fraction * width) return reject("correlation-width");
  }
  if (!plan.beta_zero) {
    if (!(m.overlap > plan.overlap_min)) return reject("overlap");
    if (!(m.rsd < plan.rsd_max)) return reject("degeneracy");
  }
  r.accepted = true;
  return r;
}

inline LowGainMetrics low_gain_metrics(const CouplingField& field) {
  const Eigen::MatrixXd joint = tpa(field).values.cwiseAbs2();
  const FrequencyGrid& grid = field.grid();
  const Eigen::VectorXd signal = joint.rowwise().sum();
  const Eigen::VectorXd idler = joint.colwise().sum().transpose();
  const int c = grid.center_index();

  LowGainMetrics m;
  auto guarded = [](auto&& fn) {
    try {
      return fn();
    } catch (const NumericError&) {
      return std::nan("");
    }
  };
  m.fwhm_signal = guarded([&] { return fwhm(grid, signal); });
  m.fwhm_idler = guarded([&] { return fwhm(grid, idler); });
  m.correlation_sigma_signal =
      guarded([&] { return moments(grid, Eigen::VectorXd(joint.col(c))).stddev; });
  m.correlation_sigma_idler =
      guarded([&] { return moments(grid, Eigen::VectorXd(joint.row(c).transpose())).stddev; });
  m.overlap = guarded([&] { return overlap(signal, idler); });
  m.rsd = guarded([&] { return rsd(grid, signal, idler); });
  return m;
}

inline ScreenResult screen_low_gain(const TaylorDispersion& candidate, const SamplePlan& plan) {
  const CouplingField field(plan_grid(plan), plan_pump(plan), candidate);
  return screen_metrics(low_gain_metrics(field), plan);
}

struct GainPoint {
  double target_photons = 0.0;
  double gain = std::nan("");
  double photons = std::nan("");
  MetricsRecord metrics{};
  double commutator_residual = std::nan("");
  std::string error;  ///< empty on success

  bool ok() const { return error.empty(); }
};

struct SampleRecord {
  std::uint64_t index = 0;
  TaylorDispersion dispersion;
  CharacteristicTimes times;
  bool accepted = false;
  std::string reason;
  LowGainMetrics low_gain;
  std::vector<GainPoint> gains;  ///< one per ladder entry for accepted samples
};

struct LandscapePoint {
  std::uint64_t index = 0;
  double tau1_ratio = 0.0;  ///< tau1 / tau
  double tau2_ratio = 0.0;  ///< tau2 / tau
  double rsd = std::nan("");
};

struct StudyResult {
  std::vector<SampleRecord> records;  ///< every screened candidate, in draw order
  std::vector<LandscapePoint> landscape;
  std::size_t accepted = 0;
};

/// Calibrates, propagates and measures one configuration at N = target.
inline GainPoint measure_gain_point(const CouplingField& field, double target,
                                    const SolverSettings& settings) {
  GainPoint p;
  p.target_photons = target;
  try {
    GainCalibration cal = calibrate_gain(target, field, settings);
    const BogoliubovTensors t =
        cal.tensors ? std::move(*cal.tensors) : propagate(field, cal.gain, settings);
    const SpectralResult s = spectra(t);
    p.gain = cal.gain;
    p.photons = s.photons;
    p.commutator_residual = commutator_residual(t);
    p.metrics = metrics(s);
  } catch (const Error& e) {
    p.error = e.what();
  }
  return p;
}

using StudyProgress = std::function<void(const SampleRecord&)>;

/// Screens candidates in draw order until `count` are accepted, then runs the
/// rigorous solver along the gain ladder for every accepted sample.
inline StudyResult run_study(const SamplePlan& plan, const StudyProgress& progress = {}) {
  validate(plan);
  StudyResult result;
  std::vector<std::size_t> accepted_slots;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(plan.max_candidates) &&
                            accepted_slots.size() < static_cast<std::size_t>(plan.count);
       ++i) {
    SampleRecord rec;
    rec.index = i;
    rec.dispersion = draw_candidate(plan, i);
    try {
      rec.times = characteristic_times(rec.dispersion);
    } catch (const NumericError&) {
      rec.times = {std::abs(rec.dispersion.alpha_s - rec.dispersion.alpha_i) * plan.length_mm,
                   std::nan(""), std::nan("")};
    }
    const ScreenResult screen = screen_low_gain(rec.dispersion, plan);
    rec.accepted = screen.accepted;
    rec.reason = screen.reason;
    rec.low_gain = screen.metrics;
    if (rec.accepted) accepted_slots.push_back(result.records.size());
    result.records.push_back(std::move(rec));
  }
  result.accepted = accepted_slots.size();

  const FrequencyGrid grid = plan_grid(plan);
  const PumpParams pump = plan_pump(plan);
  parallel_for(accepted_slots.size(), plan.workers, [&](std::size_t slot) {
    SampleRecord& rec = result.records[accepted_slots[slot]];
    const CouplingField field(grid, pump, rec.dispersion);
    for (double target : plan.gain_ladder)
      rec.gains.push_back(measure_gain_point(field, target, plan.solver));
    if (progress) progress(rec);
  });

  for (std::size_t slot : accepted_slots) {
    const SampleRecord& rec = result.records[slot];
    LandscapePoint lp{rec.index, rec.times.tau1 / plan.pump_duration_fs,
                      rec.times.tau2 / plan.pump_duration_fs, std::nan("")};
    for (const GainPoint& g : rec.gains)
      if (g.target_photons == plan.landscape_photons && g.ok()) lp.rsd = g.metrics.rsd;
    result.landscape.push_back(lp);
  }
  return result;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : std::nan("");
}

}  // namespace hgpdc
