#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "fibertap/config.hpp"
#include "fibertap/demod.hpp"
#include "fibertap/dsp/resample.hpp"
#include "fibertap/enhance.hpp"
#include "fibertap/model.hpp"
#include "fibertap/noise.hpp"

namespace fibertap {

inline double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

/// Brings a pressure recording to the interferometer rate. With `level_db`
/// set, the trace is rescaled so its sine-equivalent amplitude (sqrt(2) * RMS)
/// equals the pressure amplitude of that level.
inline SampledTrace prepare_audio(const SampledTrace& audio, const RunConfig& config) {
  require_kind(audio, TraceKind::audio_pressure, "prepare_audio");
  const double fs = config.interferometer.sample_rate;
  std::vector<double> x(audio.samples().begin(), audio.samples().end());
  if (audio.sample_rate() != fs) {
    const auto design = dsp::resample_design(audio.sample_rate(), fs, config.band.f_high);
    x = dsp::resample(x, audio.sample_rate(), fs, design);
  }
  if (config.simulation.level_db) {
    const double r = rms(x);
    if (r == 0.0) throw InputError("prepare_audio: cannot scale a silent recording to a sound level");
    const double target = spl_to_pressure(*config.simulation.level_db, config.coupling.spl_reference) / std::sqrt(2.0);
    for (double& v : x) v *= target / r;
  }
  return {TraceKind::audio_pressure, fs, std::move(x)};
}

/// Pressure at the interferometer rate -> heterodyne record, with link noise
/// drawn from `seed` when enabled in the configuration.
inline SampledTrace simulate(const RunConfig& config, const SampledTrace& audio_at_fs, std::uint64_t seed) {
  config.validate();
  const auto voice = voice_to_phase(audio_at_fs, config.coupling, config.interferometer.sensing_length);
  if (!config.simulation.noise_enabled) return synthesize_heterodyne(config.interferometer, voice, nullptr);
  const auto noise = synthesize_link_noise(config.interferometer, voice.size(), seed, config.simulation.flatten_below);
  return synthesize_heterodyne(config.interferometer, voice, &noise);
}

inline SampledTrace demodulate(const SampledTrace& het, const RunConfig& config, bool apply_highpass = true) {
  const auto cfg = config.demod.resolve(config.interferometer.intermediate_frequency);
  DemodPipelineOptions opt;
  opt.apply_highpass = apply_highpass;
  opt.audio_rate = config.demod.audio_rate;
  opt.keep_below = config.band.f_high;
  return demodulate(het, cfg, opt);
}

struct EnhanceResult {
  SampledTrace output;
  std::size_t frames = 0;
  std::size_t silent_frames = 0;
  bool used_noise_profile = false;
};

/// Spectral subtraction with the noise spectrum taken from the silent frames
/// of `noisy`, or from every frame of `noise_profile` when given.
inline EnhanceResult enhance(const SampledTrace& noisy, const RunConfig& config,
                             const SampledTrace* noise_profile = nullptr) {
  const auto params = config.enhance.resolve(noisy.sample_rate());
  EnhanceResult r{noisy, frame_count(noisy.size(), params), 0, noise_profile != nullptr};
  if (noisy.size() < params.frame_length) throw InputError("enhance: trace shorter than one frame");
  std::vector<double> noise;
  if (noise_profile != nullptr) {
    if (noise_profile->sample_rate() != noisy.sample_rate()) {
      throw InputError("enhance: noise profile sample rate differs from the input");
    }
    if (noise_profile->size() < params.frame_length) throw InputError("enhance: noise profile shorter than one frame");
    std::vector<std::size_t> all(frame_count(noise_profile->size(), params));
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    noise = estimate_noise_spectrum(*noise_profile, all, params);
  } else {
    const auto silent = detect_silent_frames(noisy, params);
    r.silent_frames = silent.size();
    noise = estimate_noise_spectrum(noisy, silent, params);
  }
  r.output = spectral_subtract(noisy, noise, params);
  return r;
}

/// Rounds every sample through float32, as a float WAV round trip does.
inline SampledTrace quantize_float32(const SampledTrace& t) {
  std::vector<double> x(t.samples().begin(), t.samples().end());
  for (double& v : x) v = static_cast<double>(static_cast<float>(v));
  return {t.kind(), t.sample_rate(), std::move(x)};
}

struct PipelineOutputs {
  SampledTrace heterodyne;
  SampledTrace phase;
  SampledTrace enhanced;
};

/// simulate -> demodulate -> enhance in one process. With `float_interchange`
/// each stage output is rounded to float32 exactly as the CLI's WAV files are.
inline PipelineOutputs run_pipeline(const RunConfig& config, const SampledTrace& audio, std::uint64_t seed,
                                    bool float_interchange = false, bool apply_highpass = true) {
  auto q = [float_interchange](SampledTrace t) { return float_interchange ? quantize_float32(t) : t; };
  auto het = q(simulate(config, prepare_audio(audio, config), seed));
  auto phase = q(demodulate(het, config, apply_highpass));
  auto enhanced = q(enhance(phase, config).output);
  return {std::move(het), std::move(phase), std::move(enhanced)};
}

}  // namespace fibertap
