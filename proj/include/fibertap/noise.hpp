#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "fibertap/constants.hpp"
#include "fibertap/dsp/fft.hpp"
#include "fibertap/error.hpp"
#include "fibertap/model.hpp"
#include "fibertap/trace.hpp"

namespace fibertap {

struct AudioBand {
  double f_low = 100.0;
  double f_high = 10'000.0;

  void validate() const {
    if (!(f_low > 0.0) || !(f_high > f_low) || !std::isfinite(f_high)) {
      throw ConfigError("band: require 0 < f_low < f_high");
    }
  }
};

// ---------------------------------------------------------------------------
// Fiber thermal phase noise

/// S(f) * f for the thermal PSD, i.e. the constant C*L of the 1/f law.
inline double thermal_psd_coefficient(const FiberSpec& fiber, double wavelength) {
  fiber.validate();
  const double k = constants::two_pi * fiber.refractive_index / wavelength;
  return k * k * (2.0 * constants::boltzmann * fiber.temperature * fiber.length * fiber.loss_angle) /
         (3.0 * constants::pi * fiber.bulk_modulus_area_product);
}

/// One-sided thermal phase-noise PSD of a fiber in rad^2/Hz.
inline double thermal_psd(const FiberSpec& fiber, double wavelength, double f) {
  if (!(f > 0.0)) throw NumericError("thermal_psd: frequency must be > 0");
  return thermal_psd_coefficient(fiber, wavelength) / f;
}

/// Band-limited RMS thermal phase, sqrt(C*L*ln(f_high/f_low)).
inline double thermal_rms(const FiberSpec& fiber, double wavelength, const AudioBand& band) {
  band.validate();
  return std::sqrt(thermal_psd_coefficient(fiber, wavelength) * std::log(band.f_high / band.f_low));
}

// ---------------------------------------------------------------------------
// Laser frequency noise through the arm delay

/// Arm-mismatch propagation delay tau0 = n * dL / c.
inline double mismatch_to_delay(double mismatch, double refractive_index) {
  if (!(mismatch >= 0.0)) throw NumericError("mismatch_to_delay: mismatch must be >= 0");
  return refractive_index * mismatch / constants::speed_of_light;
}

inline double laser_frequency_psd(const LaserSpec& laser, double f) {
  return laser.white_freq_psd + laser.flicker_coeff / f;
}

/// Phase-difference PSD through the delay-line transfer function
/// sin^2(pi f tau0) / (pi f)^2.
inline double laser_phase_psd_full(const LaserSpec& laser, double tau0, double f) {
  if (!(f > 0.0)) throw NumericError("laser_phase_psd_full: frequency must be > 0");
  if (!(tau0 >= 0.0)) throw NumericError("laser_phase_psd_full: tau0 must be >= 0");
  const double x = constants::pi * f;
  const double s = std::sin(x * tau0);
  return s * s / (x * x) * laser_frequency_psd(laser, f);
}

/// Small-delay form tau0^2 * S(f); valid while f * tau0 stays below ~0.05.
inline double laser_phase_psd_approx(const LaserSpec& laser, double tau0, double f) {
  if (!(f > 0.0)) throw NumericError("laser_phase_psd_approx: frequency must be > 0");
  return tau0 * tau0 * laser_frequency_psd(laser, f);
}

enum class PsdForm { full, approx };

inline double laser_rms(const LaserSpec& laser, double tau0, const AudioBand& band, PsdForm form) {
  band.validate();
  if (!(tau0 >= 0.0)) throw NumericError("laser_rms: tau0 must be >= 0");
  if (tau0 == 0.0) return 0.0;
  if (form == PsdForm::approx) {
    return tau0 * std::sqrt(laser.white_freq_psd * (band.f_high - band.f_low) +
                            laser.flicker_coeff * std::log(band.f_high / band.f_low));
  }
  // The integrand oscillates once per 1/tau0 Hz; split so each piece holds a
  // bounded number of lobes.
  const double lobe = 1.0 / tau0;
  const auto pieces = static_cast<std::size_t>(
      std::clamp(std::ceil((band.f_high - band.f_low) / lobe), 1.0, 100'000.0));
  const double step = (band.f_high - band.f_low) / static_cast<double>(pieces);
  auto integrand = [&](double f) { return laser_phase_psd_full(laser, tau0, f); };
  double total = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = band.f_low + step * static_cast<double>(i);
    const double b = i + 1 == pieces ? band.f_high : a + step;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 15, 1e-12);
  }
  return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// Colored noise realisation

using PsdFunction = std::function<double(double)>;

/// Gaussian time series with one-sided PSD `psd` (units^2/Hz), by shaping a
/// white complex spectrum and inverse transforming.
///
/// Below `flatten_below` the target is held at its value there, which keeps
/// 1/f shapes integrable. DC and (for even n) Nyquist bins are zero. The
/// result is a deterministic function of the arguments.
inline SampledTrace synthesize_colored_noise(const PsdFunction& psd, std::size_t n_samples, double sample_rate,
                                             std::uint64_t seed, double flatten_below = 10.0) {
  if (n_samples < 2) throw InputError("synthesize_colored_noise: need at least 2 samples");
  if (!(sample_rate > 0.0)) throw InputError("synthesize_colored_noise: sample_rate must be > 0");
  const double df = sample_rate / static_cast<double>(n_samples);
  const std::size_t nbins = n_samples / 2 + 1;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::complex<double>> spectrum(nbins);
  const double n = static_cast<double>(n_samples);
  for (std::size_t k = 1; k < nbins; ++k) {
    // Draw before the Nyquist check so the stream does not depend on parity.
    const double re = gauss(rng);
    const double im = gauss(rng);
    if (n_samples % 2 == 0 && k == nbins - 1) continue;
    const double f = std::max(static_cast<double>(k) * df, flatten_below);
    const double s = psd(f);
    if (!std::isfinite(s) || s < 0.0) {
      throw NumericError("synthesize_colored_noise: PSD is negative or non-finite at " + std::to_string(f) + " Hz");
    }
    // A bin of width df at frequency f carries variance s*df; irfft divides by n.
    const double sigma = 0.5 * n * std::sqrt(s * df);
    spectrum[k] = {sigma * re, sigma * im};
  }
  return {TraceKind::phase, sample_rate, dsp::irfft(spectrum, n_samples)};
}

/// Stream-separated seed for one noise source of a run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Thermal noise of both arms plus laser noise at the configured mismatch,
/// as one phase trace. Sources are independent, so their PSDs add.
inline SampledTrace synthesize_link_noise(const InterferometerConfig& config, std::size_t n_samples,
                                          std::uint64_t seed, double flatten_below = 10.0) {
  config.validate();
  const double lambda = config.laser.wavelength;
  const double thermal_c = thermal_psd_coefficient(config.detect_fiber, lambda) +
                           thermal_psd_coefficient(config.reference_fiber, lambda);
  const auto thermal = synthesize_colored_noise([thermal_c](double f) { return thermal_c / f; }, n_samples,
                                                config.sample_rate, derive_seed(seed, 1), flatten_below);
  const double tau0 = config.delay();
  const LaserSpec laser = config.laser;
  const auto laser_noise = synthesize_colored_noise(
      [laser, tau0](double f) { return laser_phase_psd_full(laser, tau0, f); }, n_samples, config.sample_rate,
      derive_seed(seed, 2), flatten_below);
  std::vector<double> sum(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) sum[i] = thermal[i] + laser_noise[i];
  return {TraceKind::phase, config.sample_rate, std::move(sum)};
}

// ---------------------------------------------------------------------------
// Budgets and detection limits

struct NoiseBudget {
  AudioBand band;
  double thermal_rms = 0.0;
  double laser_rms = 0.0;
  double total_rms = 0.0;
  double detection_limit_db = 0.0;
};

struct BudgetOptions {
  double snr_threshold = 1.0;   // required signal RMS / noise RMS
  bool include_thermal = true;  // mismatch sweep: add the detect-arm thermal term
};

struct BudgetRow {
  double x_value = 0.0;
  double thermal_rms = 0.0;
  double laser_rms = 0.0;
  double total_rms = 0.0;
  double limit_db = 0.0;
};

/// Lowest tone level (dB SPL, sine amplitude convention) whose RMS phase on
/// the sensing fiber reaches snr_threshold * noise_rms. -inf when noise is 0.
inline double detection_limit_db(double noise_rms, const AcousticCoupling& coupling, double sensing_length,
                                 double snr_threshold = 1.0) {
  coupling.validate();
  if (!(sensing_length > 0.0)) throw ConfigError("detection_limit_db: sensing_length must be > 0");
  if (noise_rms <= 0.0) return -std::numeric_limits<double>::infinity();
  const double amplitude_pa = std::sqrt(2.0) * snr_threshold * noise_rms / (coupling.sensitivity * sensing_length);
  return pressure_to_spl(amplitude_pa, coupling.spl_reference);
}

inline NoiseBudget make_budget(const AudioBand& band, double thermal, double laser, const AcousticCoupling& coupling,
                               double sensing_length, double snr_threshold = 1.0) {
  NoiseBudget b;
  b.band = band;
  b.thermal_rms = thermal;
  b.laser_rms = laser;
  b.total_rms = std::hypot(thermal, laser);
  b.detection_limit_db = detection_limit_db(b.total_rms, coupling, sensing_length, snr_threshold);
  return b;
}

/// Coupling sensitivity that puts the thermal-noise detection limit of a
/// detecting arm of `anchor_length` exactly at `anchor_db`.
inline double calibrate_sensitivity(FiberSpec fiber, double wavelength, const AudioBand& band, double anchor_length,
                                    double anchor_db, double sensing_length, double spl_reference = 20e-6,
                                    double snr_threshold = 1.0) {
  fiber.length = anchor_length;
  const double noise = thermal_rms(fiber, wavelength, band);
  const double signal_rms_per_unit = spl_to_pressure(anchor_db, spl_reference) * sensing_length / std::sqrt(2.0);
  return snr_threshold * noise / signal_rms_per_unit;
}

/// Thermal-limited detection level against detecting-arm length; `fiber`
/// supplies the material constants and its length is replaced per row.
inline std::vector<BudgetRow> detection_limit_vs_length(std::span<const double> lengths, const FiberSpec& fiber,
                                                        double wavelength, const AcousticCoupling& coupling,
                                                        double sensing_length, const AudioBand& band,
                                                        const BudgetOptions& options = {}) {
  if (lengths.empty()) throw InputError("detection_limit_vs_length: no lengths given");
  std::vector<BudgetRow> rows;
  rows.reserve(lengths.size());
  for (double length : lengths) {
    if (!(length >= 0.0)) throw InputError("detection_limit_vs_length: lengths must be >= 0");
    FiberSpec f = fiber;
    f.length = length;
    const double th = thermal_rms(f, wavelength, band);
    rows.push_back({length, th, 0.0, th, detection_limit_db(th, coupling, sensing_length, options.snr_threshold)});
  }
  return rows;
}

/// Laser-noise (small-delay form) detection level against arm mismatch.
/// `thermal_floor` is root-sum-squared in when options.include_thermal.
inline std::vector<BudgetRow> detection_limit_vs_mismatch(std::span<const double> mismatches, const LaserSpec& laser,
                                                          double refractive_index, const AcousticCoupling& coupling,
                                                          double sensing_length, const AudioBand& band,
                                                          double thermal_floor, const BudgetOptions& options = {}) {
  if (mismatches.empty()) throw InputError("detection_limit_vs_mismatch: no mismatches given");
  std::vector<BudgetRow> rows;
  rows.reserve(mismatches.size());
  const double th = options.include_thermal ? thermal_floor : 0.0;
  for (double m : mismatches) {
    if (!(m >= 0.0)) throw InputError("detection_limit_vs_mismatch: mismatches must be >= 0");
    const double lr = laser_rms(laser, mismatch_to_delay(m, refractive_index), band, PsdForm::approx);
    const double total = std::hypot(th, lr);
    rows.push_back({m, th, lr, total, detection_limit_db(total, coupling, sensing_length, options.snr_threshold)});
  }
  return rows;
}

}  // namespace fibertap
