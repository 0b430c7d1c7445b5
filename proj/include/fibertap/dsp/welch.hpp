#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fibertap/dsp/fft.hpp"
#include "fibertap/dsp/window.hpp"
#include "fibertap/error.hpp"

namespace fibertap::dsp {

struct WelchOptions {
  std::size_t segment_length = 4096;
  double overlap = 0.5;  // fraction in [0, 1)
};

struct Psd {
  std::vector<double> freqs;  // Hz
  std::vector<double> density;  // one-sided, units^2/Hz
};

/// Welch-averaged one-sided PSD with a periodic Hann window and per-segment
/// mean removal.
inline Psd welch_psd(std::span<const double> x, double sample_rate, const WelchOptions& opt = {}) {
  const std::size_t nseg = opt.segment_length;
  if (nseg < 8 || nseg > x.size()) throw InputError("welch_psd: segment length must be in [8, signal length]");
  if (opt.overlap < 0.0 || opt.overlap >= 1.0) throw ConfigError("welch_psd: overlap must be in [0, 1)");
  const auto hop = std::max<std::size_t>(1, nseg - static_cast<std::size_t>(std::floor(opt.overlap * nseg)));
  const auto w = hann_periodic(nseg);
  double wss = 0.0;
  for (double v : w) wss += v * v;

  const std::size_t nbins = nseg / 2 + 1;
  std::vector<double> acc(nbins, 0.0);
  std::vector<double> seg(nseg);
  std::size_t count = 0;
  for (std::size_t start = 0; start + nseg <= x.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) mean += x[start + i];
    mean /= static_cast<double>(nseg);
    for (std::size_t i = 0; i < nseg; ++i) seg[i] = (x[start + i] - mean) * w[i];
    const auto X = rfft(seg);
    for (std::size_t k = 0; k < nbins; ++k) acc[k] += std::norm(X[k]);
    ++count;
  }
  Psd out;
  out.freqs.resize(nbins);
  out.density.resize(nbins);
  const double scale = 1.0 / (sample_rate * wss * static_cast<double>(count));
  for (std::size_t k = 0; k < nbins; ++k) {
    out.freqs[k] = static_cast<double>(k) * sample_rate / static_cast<double>(nseg);
    const bool edge = k == 0 || (nseg % 2 == 0 && k == nseg / 2);
    out.density[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

}  // namespace fibertap::dsp
