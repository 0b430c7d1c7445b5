#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fibertap/dsp/fir.hpp"
#include "fibertap/error.hpp"

namespace fibertap::dsp {

struct Ratio {
  std::int64_t up = 1;
  std::int64_t down = 1;
};

/// Reduced up/down ratio between two sample rates. Rates must be whole Hz
/// (to 1e-9 relative) so the ratio is exact.
inline Ratio rate_ratio(double from_rate, double to_rate) {
  const double a = std::round(from_rate), b = std::round(to_rate);
  if (a < 1.0 || b < 1.0 || std::abs(a - from_rate) > 1e-9 * from_rate || std::abs(b - to_rate) > 1e-9 * to_rate) {
    throw ConfigError("rate_ratio: sample rates must be positive whole numbers of Hz");
  }
  const auto ia = static_cast<std::int64_t>(a), ib = static_cast<std::int64_t>(b);
  const auto g = std::gcd(ia, ib);
  return {ib / g, ia / g};
}

/// Polyphase rational resampling: upsample by `up`, apply `h` (designed at
/// the upsampled rate, odd length), downsample by `down`. The FIR group delay
/// is removed, so output sample m sits at input time m * down / up.
inline std::vector<double> upfirdn_centered(std::span<const double> x, std::span<const double> h, Ratio r) {
  if (x.empty()) return {};
  const std::int64_t n_in = static_cast<std::int64_t>(x.size());
  const std::int64_t taps = static_cast<std::int64_t>(h.size());
  const std::int64_t delay = (taps - 1) / 2;
  const std::int64_t n_out = (n_in * r.up + r.down - 1) / r.down;
  std::vector<double> y(static_cast<std::size_t>(n_out));
  for (std::int64_t m = 0; m < n_out; ++m) {
    // Position on the upsampled grid aligned with output sample m.
    const std::int64_t t = m * r.down + delay;
    // Taps k with (t - k) divisible by up index real input samples.
    std::int64_t k = t % r.up;
    double acc = 0.0;
    for (; k < taps; k += r.up) {
      const std::int64_t idx = (t - k) / r.up;
      if (idx < 0) break;
      if (idx < n_in) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(idx)];
    }
    y[static_cast<std::size_t>(m)] = acc * static_cast<double>(r.up);
  }
  return y;
}

struct ResampleDesign {
  double passband_edge = 0.0;  // Hz, content below is preserved
  double stopband_edge = 0.0;  // Hz, content above is rejected
  double atten_db = 80.0;
};

/// Anti-alias / anti-image design for a rational rate change.
///
/// The stopband starts at the lower Nyquist frequency. When that leaves less
/// than a quarter of `keep_below` for the transition, the stopband moves up to
/// (lower rate - keep_below): energy between the two folds above keep_below
/// after decimation and never into the kept band.
inline ResampleDesign resample_design(double from_rate, double to_rate, double keep_below, double atten_db = 80.0) {
  const double low_rate = std::min(from_rate, to_rate);
  ResampleDesign d;
  d.atten_db = atten_db;
  d.stopband_edge = low_rate / 2.0;
  d.passband_edge = std::min(keep_below, 0.8 * d.stopband_edge);
  if (d.stopband_edge - keep_below < 0.25 * keep_below && keep_below < low_rate / 2.0) {
    d.passband_edge = keep_below;
    d.stopband_edge = low_rate - keep_below;
  }
  return d;
}

inline std::vector<double> resample(std::span<const double> x, double from_rate, double to_rate,
                                    const ResampleDesign& design) {
  const Ratio r = rate_ratio(from_rate, to_rate);
  if (r.up == 1 && r.down == 1) return {x.begin(), x.end()};
  const double fs_up = from_rate * static_cast<double>(r.up);
  const double cutoff = 0.5 * (design.passband_edge + design.stopband_edge);
  const double transition = design.stopband_edge - design.passband_edge;
  const auto h = design_kaiser_lowpass(fs_up, cutoff, transition, design.atten_db);
  if (x.size() < 2) return upfirdn_centered(x, h, r);
  // Odd reflection at both ends keeps the edges free of the zero-padding dip.
  // The pad is a whole number of `down` blocks so output samples stay on the
  // original grid.
  const std::int64_t half = static_cast<std::int64_t>(h.size()) / (2 * r.up) + 1;
  std::int64_t pad = ((half + r.down - 1) / r.down) * r.down;
  pad = std::min<std::int64_t>(pad, (static_cast<std::int64_t>(x.size()) - 1) / r.down * r.down);
  const auto p = static_cast<std::size_t>(pad);
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * p);
  for (std::size_t i = p; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= p; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - std::min(i, n - 1)]);
  auto y = upfirdn_centered(ext, h, r);
  const auto skip = static_cast<std::size_t>(pad * r.up / r.down);
  const auto n_out = static_cast<std::size_t>((static_cast<std::int64_t>(n) * r.up + r.down - 1) / r.down);
  return {y.begin() + static_cast<std::ptrdiff_t>(skip), y.begin() + static_cast<std::ptrdiff_t>(skip + n_out)};
}

}  // namespace fibertap::dsp
