#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fibertap/constants.hpp"
#include "fibertap/dsp/fir.hpp"
#include "fibertap/dsp/iir.hpp"
#include "fibertap/dsp/resample.hpp"
#include "fibertap/error.hpp"
#include "fibertap/model.hpp"
#include "fibertap/trace.hpp"

namespace fibertap {

struct DemodConfig {
  double beat_frequency = 25e3;    // Hz
  double lowpass_cutoff = 12.5e3;  // Hz, -6 dB point of the post-mixing FIR
  double highpass_cutoff = 500.0;  // Hz, 0 disables
  int filter_order = 4;
  double stopband_db = 140.0;      // post-mixing FIR attenuation

  void validate(double sample_rate) const {
    if (!(beat_frequency > 0.0) || !(beat_frequency < sample_rate / 2.0)) {
      throw NyquistError("demod.beat_frequency must lie in (0, fs/2)");
    }
    if (!(lowpass_cutoff > 0.0) || !(lowpass_cutoff < beat_frequency)) {
      throw ConfigError("demod.lowpass_cutoff must lie in (0, demod.beat_frequency)");
    }
    if (!(highpass_cutoff >= 0.0)) throw ConfigError("demod.highpass_cutoff must be >= 0");
    if (filter_order < 1 || filter_order > 16) throw ConfigError("demod.filter_order must be in [1, 16]");
    if (!(stopband_db >= 60.0)) throw ConfigError("demod.stopband_db must be >= 60");
  }

  // Transition band of the mixing FIR: a fifth of the distance to the nearer
  // of DC and the beat frequency on either side of the cutoff.
  double lowpass_transition() const {
    return 0.4 * std::min(lowpass_cutoff, beat_frequency - lowpass_cutoff);
  }

  static DemodConfig for_beat(double beat_frequency) {
    DemodConfig c;
    c.beat_frequency = beat_frequency;
    c.lowpass_cutoff = beat_frequency / 2.0;
    return c;
  }
};

/// Mixes the heterodyne record down by the beat frequency and low-passes it.
/// The result z has |z| ~ a*E0^2 and arg z equal to the beat phase.
namespace detail {

// Least-squares fit of x ~ c0 + c1 cos(w t) + c2 sin(w t) over `count` samples
// starting at `first`; returns {c0, c1, c2}.
inline std::array<double, 3> fit_carrier(std::span<const double> x, std::size_t first, std::size_t count, double f,
                                         double fs) {
  double m[3][3] = {}, r[3] = {};
  for (std::size_t i = first; i < first + count; ++i) {
    const double ph = carrier_phase(f, fs, i);
    const double b[3] = {1.0, std::cos(ph), std::sin(ph)};
    for (int a = 0; a < 3; ++a) {
      r[a] += b[a] * x[i];
      for (int c = 0; c < 3; ++c) m[a][c] += b[a] * b[c];
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 normal equations.
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
    }
    std::swap(m[col], m[piv]);
    std::swap(r[col], r[piv]);
    if (m[col][col] == 0.0) return {0.0, 0.0, 0.0};
    for (int row = col + 1; row < 3; ++row) {
      const double g = m[row][col] / m[col][col];
      for (int c = col; c < 3; ++c) m[row][c] -= g * m[col][c];
      r[row] -= g * r[col];
    }
  }
  std::array<double, 3> c{};
  for (int row = 2; row >= 0; --row) {
    double acc = r[row];
    for (int k = row + 1; k < 3; ++k) acc -= m[row][k] * c[static_cast<std::size_t>(k)];
    c[static_cast<std::size_t>(row)] = acc / m[row][row];
  }
  return c;
}

}  // namespace detail

/// Mix the beat down to DC and low-pass. The record is extended past both
/// ends with a carrier fitted to the nearest samples, so the FIR sees a
/// continuous beat instead of a step into zeros.
inline BasebandTrace iq_demodulate(const SampledTrace& het, const DemodConfig& cfg) {
  require_kind(het, TraceKind::heterodyne, "iq_demodulate");
  const double fs = het.sample_rate();
  cfg.validate(fs);
  const double f = cfg.beat_frequency;
  const auto h = dsp::design_kaiser_lowpass(fs, cfg.lowpass_cutoff, cfg.lowpass_transition(), cfg.stopband_db);
  const std::size_t n = het.size();
  const std::size_t pad = h.size() / 2;
  const std::size_t fit_len = std::min(n, std::max<std::size_t>(pad, static_cast<std::size_t>(std::ceil(4.0 * fs / f))));
  const auto x = het.samples();

  std::vector<std::complex<double>> mixed(n + 2 * pad);
  auto lo = [&](std::size_t j) { return std::polar(1.0, -carrier_phase(f, fs, j)); };
  const auto head = detail::fit_carrier(x, 0, fit_len, f, fs);
  const auto tail = detail::fit_carrier(x, n - fit_len, fit_len, f, fs);
  // Extended index j maps to record index j - pad; the local oscillator runs
  // on the extended grid and is re-referenced below.
  const double w = constants::two_pi * f / fs;
  for (std::size_t j = 0; j < mixed.size(); ++j) {
    double v;
    if (j < pad) {
      const double t = -static_cast<double>(pad - j);
      v = head[0] + head[1] * std::cos(w * t) + head[2] * std::sin(w * t);
    } else if (j >= pad + n) {
      const double t = static_cast<double>(j - pad);
      v = tail[0] + tail[1] * std::cos(w * t) + tail[2] * std::sin(w * t);
    } else {
      v = x[j - pad];
    }
    mixed[j] = v * lo(j);
  }
  auto filtered = dsp::filter_centered(mixed, h);
  // Undo the pad offset so the reference phase is that of record sample 0.
  const std::complex<double> rot = std::polar(1.0, carrier_phase(f, fs, pad));
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = filtered[i + pad] * rot;
  return {TraceKind::baseband, fs, std::move(out)};
}

inline std::vector<double> unwrap(std::span<const double> wrapped) {
  std::vector<double> out(wrapped.begin(), wrapped.end());
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double d = wrapped[i] - wrapped[i - 1];
    offset -= constants::two_pi * std::round(d / constants::two_pi);
    out[i] = wrapped[i] + offset;
  }
  return out;
}

/// Continuous phase of a baseband trace. Assumes the true phase moves by less
/// than pi per sample; faster changes come out aliased by multiples of 2*pi.
inline SampledTrace unwrap_phase(const BasebandTrace& baseband) {
  std::vector<double> wrapped(baseband.size());
  for (std::size_t i = 0; i < baseband.size(); ++i) wrapped[i] = std::arg(baseband[i]);
  return {TraceKind::phase, baseband.sample_rate(), unwrap(wrapped)};
}

/// Zero-phase Butterworth high-pass (forward then backward), so the gain at
/// `cutoff` is -6 dB and the group delay is zero.
inline SampledTrace highpass(const SampledTrace& trace, double cutoff, int order) {
  const double fs = trace.sample_rate();
  const auto sos = dsp::design_butterworth(order, cutoff, fs, dsp::FilterType::highpass);
  // Pad by a few time constants of the cutoff so edge transients settle.
  const auto padlen = static_cast<std::size_t>(std::ceil(6.0 * fs / cutoff));
  return {trace.kind(), fs, dsp::filtfilt(sos, trace.samples(), padlen)};
}

/// Anti-aliased rational resampling to `target_rate`. Content below
/// `keep_below` is kept within a fraction of a dB.
inline SampledTrace decimate_to_audio(const SampledTrace& trace, double target_rate, double keep_below = 10e3) {
  const double fs = trace.sample_rate();
  if (target_rate == fs) return trace;
  if (!(target_rate / 2.0 > keep_below)) {
    throw ConfigError("decimate_to_audio: target rate " + std::to_string(target_rate) +
                      " Hz cannot carry content up to " + std::to_string(keep_below) + " Hz");
  }
  const auto design = dsp::resample_design(fs, target_rate, keep_below);
  return {trace.kind(), target_rate, dsp::resample(trace.samples(), fs, target_rate, design)};
}

struct DemodPipelineOptions {
  bool apply_highpass = true;
  double audio_rate = 40e3;   // 0 keeps the input rate
  double keep_below = 10e3;
};

/// iq_demodulate -> unwrap -> highpass -> decimate_to_audio.
inline SampledTrace demodulate(const SampledTrace& het, const DemodConfig& cfg, const DemodPipelineOptions& opt = {}) {
  auto phase = unwrap_phase(iq_demodulate(het, cfg));
  if (opt.apply_highpass && cfg.highpass_cutoff > 0.0) phase = highpass(phase, cfg.highpass_cutoff, cfg.filter_order);
  if (opt.audio_rate > 0.0) phase = decimate_to_audio(phase, opt.audio_rate, opt.keep_below);
  return phase;
}

}  // namespace fibertap
