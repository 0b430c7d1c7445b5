#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fibertap/dsp/fft.hpp"
#include "fibertap/dsp/window.hpp"
#include "fibertap/error.hpp"
#include "fibertap/trace.hpp"

namespace fibertap {

struct SpectralSubtractParams {
  std::size_t frame_length = 800;  // samples (20 ms at 40 kHz)
  std::size_t hop = 400;
  double oversubtraction = 2.0;
  double spectral_floor = 0.02;
  double silence_threshold_db = -10.0;

  void validate() const {
    if (frame_length < 2) throw ConfigError("enhance.frame_length must be >= 2");
    if (hop == 0 || hop > frame_length) throw ConfigError("enhance.hop must lie in (0, frame_length]");
    if (!(oversubtraction >= 1.0)) throw ConfigError("enhance.oversubtraction must be >= 1");
    if (!(spectral_floor >= 0.0 && spectral_floor < 1.0)) throw ConfigError("enhance.spectral_floor must lie in [0, 1)");
    if (!std::isfinite(silence_threshold_db)) throw ConfigError("enhance.silence_threshold_db must be finite");
  }

  // 20 ms Hann frames with 50% overlap.
  static SpectralSubtractParams for_rate(double sample_rate, double frame_seconds = 0.020) {
    SpectralSubtractParams p;
    p.frame_length = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(frame_seconds * sample_rate)));
    p.frame_length += p.frame_length % 2;
    p.hop = p.frame_length / 2;
    return p;
  }
};

/// Number of analysis frames: starts at 0, hop apart, the last one zero-padded
/// at the tail to cover the final sample.
inline std::size_t frame_count(std::size_t n_samples, const SpectralSubtractParams& p) {
  if (n_samples < p.frame_length) return 0;
  return 1 + (n_samples - p.frame_length + p.hop - 1) / p.hop;
}

namespace detail {

inline void load_frame(std::span<const double> x, std::ptrdiff_t start, std::span<const double> window,
                       std::vector<double>& frame) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
    frame[i] = (idx >= 0 && idx < n) ? x[static_cast<std::size_t>(idx)] * window[i] : 0.0;
  }
}

inline double frame_energy(std::span<const double> x, std::size_t start, std::size_t length) {
  double e = 0.0;
  for (std::size_t i = start; i < std::min(start + length, x.size()); ++i) e += x[i] * x[i];
  return e;
}

}  // namespace detail

/// Frames whose energy is at most |silence_threshold_db| above the median
/// frame energy. Stationary noise therefore comes out entirely silent, while
/// bursts that stand clear of the median are excluded.
inline std::vector<std::size_t> detect_silent_frames(const SampledTrace& trace, const SpectralSubtractParams& p) {
  p.validate();
  if (trace.size() < p.frame_length) throw InputError("detect_silent_frames: trace shorter than one frame");
  const auto x = trace.samples();
  const std::size_t count = frame_count(x.size(), p);
  std::vector<double> energy(count);
  for (std::size_t j = 0; j < count; ++j) energy[j] = detail::frame_energy(x, j * p.hop, p.frame_length);

  auto sorted = energy;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(count / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  double median = *mid;
  if (count % 2 == 0) median = 0.5 * (median + *std::max_element(sorted.begin(), mid));

  const double limit = median * std::pow(10.0, std::abs(p.silence_threshold_db) / 10.0);
  std::vector<std::size_t> silent;
  for (std::size_t j = 0; j < count; ++j) {
    if (energy[j] <= limit) silent.push_back(j);
  }
  return silent;
}

/// Mean windowed periodogram |FFT(w*x)|^2 over the given frames, one value
/// per bin (frame_length/2 + 1 bins).
inline std::vector<double> estimate_noise_spectrum(const SampledTrace& trace, std::span<const std::size_t> frames,
                                                   const SpectralSubtractParams& p) {
  p.validate();
  if (frames.empty()) throw EstimationError("estimate_noise_spectrum: no silent frames to estimate noise from");
  const auto x = trace.samples();
  const auto window = dsp::hann_periodic(p.frame_length);
  const std::size_t count = frame_count(x.size(), p);
  std::vector<double> acc(p.frame_length / 2 + 1, 0.0);
  std::vector<double> frame(p.frame_length);
  for (std::size_t j : frames) {
    if (j >= count) throw InputError("estimate_noise_spectrum: frame index out of range");
    detail::load_frame(x, static_cast<std::ptrdiff_t>(j * p.hop), window, frame);
    const auto X = dsp::rfft(frame);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(X[k]);
  }
  for (double& v : acc) v /= static_cast<double>(frames.size());
  return acc;
}

/// Power spectral subtraction with over-subtraction and a spectral floor:
///   |Y|^2 -> max(|Y|^2 - beta*N, floor*|Y|^2), phase of Y kept.
/// Frames are resynthesized by overlap-add and normalized by the summed
/// analysis window, so a zero noise spectrum reproduces the input.
inline SampledTrace spectral_subtract(const SampledTrace& noisy, std::span<const double> noise_spectrum,
                                      const SpectralSubtractParams& p) {
  p.validate();
  const std::size_t nbins = p.frame_length / 2 + 1;
  if (noise_spectrum.size() != nbins) {
    throw InputError("spectral_subtract: noise spectrum has " + std::to_string(noise_spectrum.size()) +
                     " bins, frame needs " + std::to_string(nbins));
  }
  const auto x = noisy.samples();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto L = static_cast<std::ptrdiff_t>(p.frame_length);
  const auto H = static_cast<std::ptrdiff_t>(p.hop);
  const auto window = dsp::hann_periodic(p.frame_length);

  // Frames start L - H samples before the signal so every sample sits under
  // the same number of frames.
  std::vector<double> out(x.size(), 0.0), norm(x.size(), 0.0);
  std::vector<double> frame(p.frame_length);
  for (std::ptrdiff_t start = H - L; start < n; start += H) {
    detail::load_frame(x, start, window, frame);
    auto Y = dsp::rfft(frame);
    for (std::size_t k = 0; k < nbins; ++k) {
      const double power = std::norm(Y[k]);
      if (power <= 0.0) continue;
      const double cleaned = std::max(power - p.oversubtraction * noise_spectrum[k], p.spectral_floor * power);
      Y[k] *= std::sqrt(cleaned / power);
    }
    const auto y = dsp::irfft(Y, p.frame_length);
    for (std::ptrdiff_t i = 0; i < L; ++i) {
      const std::ptrdiff_t idx = start + i;
      if (idx < 0 || idx >= n) continue;
      out[static_cast<std::size_t>(idx)] += y[static_cast<std::size_t>(i)];
      norm[static_cast<std::size_t>(idx)] += window[static_cast<std::size_t>(i)];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (norm[i] > 0.0) out[i] /= norm[i];
  }
  return {noisy.kind(), noisy.sample_rate(), std::move(out)};
}

inline constexpr double segmental_snr_floor_db = -10.0;
inline constexpr double segmental_snr_ceiling_db = 35.0;

/// Mean over non-overlapping frames of 10*log10(sum ref^2 / sum (ref - proc)^2),
/// each frame clamped to [-10, 35] dB. A trailing partial frame is ignored.
inline double segmental_snr(const SampledTrace& processed, const SampledTrace& reference, std::size_t frame_length) {
  if (processed.size() != reference.size() || processed.sample_rate() != reference.sample_rate()) {
    throw InputError("segmental_snr: traces differ in length or sample rate");
  }
  if (frame_length == 0 || reference.size() < frame_length) {
    throw InputError("segmental_snr: trace shorter than one frame");
  }
  const std::size_t frames = reference.size() / frame_length;
  double sum = 0.0;
  for (std::size_t j = 0; j < frames; ++j) {
    double sig = 0.0, err = 0.0;
    for (std::size_t i = j * frame_length; i < (j + 1) * frame_length; ++i) {
      const double r = reference[i];
      const double e = r - processed[i];
      sig += r * r;
      err += e * e;
    }
    double db;
    if (err == 0.0) {
      db = segmental_snr_ceiling_db;
    } else if (sig == 0.0) {
      db = segmental_snr_floor_db;
    } else {
      db = std::clamp(10.0 * std::log10(sig / err), segmental_snr_floor_db, segmental_snr_ceiling_db);
    }
    sum += db;
  }
  return sum / static_cast<double>(frames);
}

}  // namespace fibertap
