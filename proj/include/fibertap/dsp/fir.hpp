#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fibertap/constants.hpp"
#include "fibertap/dsp/fft.hpp"
#include "fibertap/dsp/window.hpp"
#include "fibertap/error.hpp"

namespace fibertap::dsp {

/// Linear-phase low-pass by the Kaiser window method.
///
/// `cutoff` is the -6 dB point; the passband edge sits at cutoff - transition/2
/// and the stopband edge at cutoff + transition/2. Length is odd so the group
/// delay is an integer number of samples, and the DC gain is exactly one.
inline std::vector<double> design_kaiser_lowpass(double sample_rate, double cutoff, double transition,
                                                 double atten_db) {
  if (!(cutoff > 0.0) || !(cutoff < sample_rate / 2.0)) {
    throw NyquistError("design_kaiser_lowpass: cutoff must lie in (0, fs/2)");
  }
  if (!(transition > 0.0)) throw ConfigError("design_kaiser_lowpass: transition width must be positive");
  const double d_omega = constants::two_pi * transition / sample_rate;
  auto taps = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * d_omega))) + 1;
  taps = std::max<std::size_t>(taps, 3);
  if (taps % 2 == 0) ++taps;

  const auto w = kaiser(taps, kaiser_beta(atten_db));
  const double fc = cutoff / sample_rate;  // cycles/sample
  const double mid = static_cast<double>(taps - 1) / 2.0;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps; ++i) {
    const double m = static_cast<double>(i) - mid;
    const double sinc = m == 0.0 ? 2.0 * fc : std::sin(constants::two_pi * fc * m) / (constants::pi * m);
    h[i] = sinc * w[i];
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

/// Complex frequency response of an FIR at frequency f.
inline std::complex<double> fir_response(std::span<const double> h, double sample_rate, double f) {
  std::complex<double> acc{};
  const double w = constants::two_pi * f / sample_rate;
  for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * std::polar(1.0, -w * static_cast<double>(i));
  return acc;
}

/// Full linear convolution of x with h via FFT (length x.size()+h.size()-1).
inline std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t nfft = next_pow2(out_len);
  std::vector<double> xp(nfft, 0.0), hp(nfft, 0.0);
  std::copy(x.begin(), x.end(), xp.begin());
  std::copy(h.begin(), h.end(), hp.begin());
  auto X = rfft(xp);
  const auto H = rfft(hp);
  for (std::size_t k = 0; k < X.size(); ++k) X[k] *= H[k];
  auto y = irfft(X, nfft);
  y.resize(out_len);
  return y;
}

/// Applies an odd-length linear-phase FIR with its group delay removed, so
/// output[i] lines up with input[i]. Output length equals input length.
inline std::vector<double> filter_centered(std::span<const double> x, std::span<const double> h) {
  if (h.size() % 2 == 0) throw ConfigError("filter_centered: FIR length must be odd");
  const auto full = fft_convolve(x, h);
  const std::size_t delay = (h.size() - 1) / 2;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = full[i + delay];
  return y;
}

inline std::vector<std::complex<double>> filter_centered(std::span<const std::complex<double>> x,
                                                         std::span<const double> h) {
  std::vector<double> re(x.size()), im(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  const auto yr = filter_centered(re, h);
  const auto yi = filter_centered(im, h);
  std::vector<std::complex<double>> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = {yr[i], yi[i]};
  return y;
}

}  // namespace fibertap::dsp
