#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fibertap/constants.hpp"
#include "fibertap/error.hpp"
#include "fibertap/trace.hpp"

namespace fibertap {

/// Optical carrier and the frequency-noise model S(f) = white + flicker/f of
/// the instantaneous angular frequency (rad^2/s^2/Hz, one-sided).
struct LaserSpec {
  double wavelength = 1550e-9;  // m
  double linewidth = 100.0;     // Hz
  double white_freq_psd = 0.0;  // rad^2/s^2/Hz
  double flicker_coeff = 0.0;   // rad^2/s^2

  double center_frequency() const { return constants::two_pi * constants::speed_of_light / wavelength; }

  void validate() const {
    if (!(wavelength > 0.0) || !std::isfinite(wavelength)) throw ConfigError("laser.wavelength must be > 0");
    if (!(linewidth >= 0.0)) throw ConfigError("laser.linewidth must be >= 0");
    if (!(white_freq_psd >= 0.0) || !std::isfinite(white_freq_psd)) {
      throw ConfigError("laser.white_freq_psd must be >= 0");
    }
    if (!(flicker_coeff >= 0.0) || !std::isfinite(flicker_coeff)) {
      throw ConfigError("laser.flicker_coeff must be >= 0");
    }
  }

  // A Lorentzian line of FWHM `linewidth` has white frequency noise of
  // 4*pi*linewidth rad^2/s^2/Hz (one-sided).
  static double white_psd_from_linewidth(double linewidth_hz) { return 4.0 * constants::pi * linewidth_hz; }

  static LaserSpec from_linewidth(double wavelength, double linewidth_hz, double flicker = 0.0) {
    LaserSpec s{wavelength, linewidth_hz, white_psd_from_linewidth(linewidth_hz), flicker};
    s.validate();
    return s;
  }
};

/// Fiber constants entering the thermal phase-noise PSD. K*A is kept as one
/// product since it is what survives a change of coating.
struct FiberSpec {
  double length = 0.0;                        // m
  double refractive_index = 1.468;
  double bulk_modulus_area_product = 452.8;   // N
  double loss_angle = 1e-3;
  double temperature = 293.15;                // K

  void validate(const std::string& name = "fiber") const {
    if (!(length >= 0.0) || !std::isfinite(length)) throw ConfigError(name + ".length must be >= 0");
    if (!(refractive_index > 1.0)) throw ConfigError(name + ".refractive_index must be > 1");
    if (!(bulk_modulus_area_product > 0.0)) throw ConfigError(name + ".bulk_modulus_area_product must be > 0");
    if (!(loss_angle > 0.0)) throw ConfigError(name + ".loss_angle must be > 0");
    if (!(temperature > 0.0)) throw ConfigError(name + ".temperature must be > 0");
  }
};

struct InterferometerConfig {
  LaserSpec laser = LaserSpec::from_linewidth(1550e-9, 100.0);
  FiberSpec detect_fiber{.length = 1103.0};
  FiberSpec reference_fiber{.length = 2306.0};
  double sensing_length = 3.0;           // m, indoor tail exposed to sound
  double aom_shift = 80e6;               // Hz
  double reflection_amplitude = 0.2;     // field amplitude, power reflectivity = square
  double intermediate_frequency = 25e3;  // Hz, beat as represented in the record
  double sample_rate = 400e3;            // Hz
  double initial_phase = 0.0;            // rad, static beat phase incl. -(w0 + w_aom)*tau0

  // Reference arm balanced against the double-pass detecting arm.
  double arm_mismatch() const { return std::abs(reference_fiber.length - 2.0 * detect_fiber.length); }
  double delay() const { return detect_fiber.refractive_index * arm_mismatch() / constants::speed_of_light; }

  void validate() const {
    laser.validate();
    detect_fiber.validate("detect_fiber");
    reference_fiber.validate("reference_fiber");
    if (!(sample_rate > 0.0)) throw ConfigError("interferometer.sample_rate must be > 0");
    if (!(intermediate_frequency > 0.0) || !(intermediate_frequency < sample_rate / 2.0)) {
      throw NyquistError("interferometer.intermediate_frequency must lie in (0, interferometer.sample_rate/2): got " +
                         std::to_string(intermediate_frequency) + " Hz at " + std::to_string(sample_rate) + " Hz");
    }
    if (!(reflection_amplitude >= 0.0 && reflection_amplitude <= 1.0)) {
      throw ConfigError("interferometer.reflection_amplitude must lie in [0, 1]");
    }
    if (!(sensing_length >= 0.0) || sensing_length > detect_fiber.length) {
      throw ConfigError("interferometer.sensing_length must lie in [0, detect_fiber.length]");
    }
    if (!std::isfinite(initial_phase)) throw ConfigError("interferometer.initial_phase must be finite");
  }
};

/// Linear acoustic coupling: phase per pascal per metre of exposed fiber.
struct AcousticCoupling {
  double sensitivity = 1.0;       // rad/(Pa*m)
  double spl_reference = 20e-6;   // Pa

  void validate() const {
    if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) throw ConfigError("coupling.sensitivity must be > 0");
    if (!(spl_reference > 0.0)) throw ConfigError("coupling.spl_reference must be > 0");
  }
};

/// Pressure amplitude in Pa for a level in dB SPL.
inline double spl_to_pressure(double level_db, double spl_reference = 20e-6) {
  return spl_reference * std::pow(10.0, level_db / 20.0);
}

inline double pressure_to_spl(double pressure, double spl_reference = 20e-6) {
  return 20.0 * std::log10(pressure / spl_reference);
}

inline SampledTrace voice_to_phase(const SampledTrace& audio, const AcousticCoupling& coupling,
                                   double sensing_length) {
  require_kind(audio, TraceKind::audio_pressure, "voice_to_phase");
  coupling.validate();
  if (!(sensing_length >= 0.0) || !std::isfinite(sensing_length)) {
    throw InputError("voice_to_phase: sensing_length must be >= 0");
  }
  const double gain = coupling.sensitivity * sensing_length;
  std::vector<double> phase(audio.size());
  for (std::size_t i = 0; i < audio.size(); ++i) phase[i] = gain * audio[i];
  return {TraceKind::phase, audio.sample_rate(), std::move(phase)};
}

// Fraction of a cycle for f*i/fs, reduced before the multiply by 2*pi so the
// argument stays small over long records.
inline double carrier_phase(double frequency, double sample_rate, std::size_t i) {
  const double cycles = frequency * static_cast<double>(i) / sample_rate;
  return constants::two_pi * (cycles - std::floor(cycles));
}

/// Photodiode intensity of the heterodyne interferometer with E0^2 = 1:
///   I = (1 + a^2) + 2a cos(2*pi*f_IF*t + voice + noise + static)
/// where the static term lumps the initial phase and -(w0 + w_aom)*tau0.
inline SampledTrace synthesize_heterodyne(const InterferometerConfig& config, const SampledTrace& voice_phase,
                                          const SampledTrace* noise_phase) {
  config.validate();
  require_kind(voice_phase, TraceKind::phase, "synthesize_heterodyne");
  if (voice_phase.sample_rate() != config.sample_rate) {
    throw InputError("synthesize_heterodyne: voice trace rate differs from interferometer.sample_rate");
  }
  if (noise_phase != nullptr) {
    require_kind(*noise_phase, TraceKind::phase, "synthesize_heterodyne");
    if (noise_phase->sample_rate() != config.sample_rate || noise_phase->size() != voice_phase.size()) {
      throw InputError("synthesize_heterodyne: noise trace must match the voice trace rate and length");
    }
  }
  const double a = config.reflection_amplitude;
  const double dc = 1.0 + a * a;
  const double beat = 2.0 * a;
  // initial_phase stands for the whole static term, delay contribution included.
  const double static_phase = config.initial_phase;
  std::vector<double> out(voice_phase.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double phi = voice_phase[i] + static_phase;
    if (noise_phase != nullptr) phi += (*noise_phase)[i];
    out[i] = dc + beat * std::cos(carrier_phase(config.intermediate_frequency, config.sample_rate, i) + phi);
  }
  return {TraceKind::heterodyne, config.sample_rate, std::move(out)};
}

}  // namespace fibertap
