#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fibertap/constants.hpp"
#include "fibertap/error.hpp"

namespace fibertap::dsp {

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using SosFilter = std::vector<Biquad>;

enum class FilterType { lowpass, highpass };

/// Digital Butterworth filter by bilinear transform with prewarping.
/// Odd orders produce a trailing first-order section (b2 = a2 = 0).
inline SosFilter design_butterworth(int order, double cutoff, double sample_rate, FilterType type) {
  if (order < 1 || order > 16) throw ConfigError("design_butterworth: order must be in [1, 16]");
  if (!(cutoff > 0.0) || !(cutoff < sample_rate / 2.0)) {
    throw NyquistError("design_butterworth: cutoff must lie in (0, fs/2)");
  }
  using cd = std::complex<double>;
  const double k = 2.0 * sample_rate;
  const double warped = k * std::tan(constants::pi * cutoff / sample_rate);
  const bool hp = type == FilterType::highpass;
  // Numerator root in z: lowpass zeros at z = -1, highpass zeros at z = +1.
  const double zero = hp ? 1.0 : -1.0;

  auto to_z = [k](cd s) { return (k + s) / (k - s); };

  SosFilter sos;
  const int pairs = order / 2;
  for (int i = 0; i < pairs; ++i) {
    const double theta = constants::pi * (2.0 * i + 1.0 + order) / (2.0 * order);
    const cd proto = std::polar(1.0, theta);  // unit-circle pole, left half plane
    const cd s_pole = hp ? warped / proto : warped * proto;
    const cd zp = to_z(s_pole);
    Biquad q;
    q.a1 = -2.0 * zp.real();
    q.a2 = std::norm(zp);
    q.b0 = 1.0;
    q.b1 = -2.0 * zero;
    q.b2 = 1.0;
    sos.push_back(q);
  }
  if (order % 2 == 1) {
    // Prototype pole s = -1 maps to s = -warped under both transforms.
    const double real_pole = -warped;
    const double zp = (k + real_pole) / (k - real_pole);
    Biquad q;
    q.a1 = -zp;
    q.b0 = 1.0;
    q.b1 = -zero;
    sos.push_back(q);
  }

  // Unit gain at DC (lowpass) or Nyquist (highpass).
  const cd z = hp ? cd(-1.0, 0.0) : cd(1.0, 0.0);
  for (auto& q : sos) {
    const cd zi = 1.0 / z;
    const cd num = q.b0 + q.b1 * zi + q.b2 * zi * zi;
    const cd den = 1.0 + q.a1 * zi + q.a2 * zi * zi;
    const double g = std::abs(den / num);
    q.b0 *= g;
    q.b1 *= g;
    q.b2 *= g;
  }
  for (const auto& q : sos) {
    // Poles strictly inside the unit circle.
    const double disc = q.a1 * q.a1 - 4.0 * q.a2;
    const double r = disc < 0.0 ? std::sqrt(q.a2)
                                : std::max(std::abs((-q.a1 + std::sqrt(disc)) / 2.0),
                                           std::abs((-q.a1 - std::sqrt(disc)) / 2.0));
    if (!(r < 1.0)) throw NumericError("design_butterworth: unstable section (cutoff too close to 0 or fs/2)");
  }
  return sos;
}

inline std::complex<double> sos_response(const SosFilter& sos, double sample_rate, double f) {
  const std::complex<double> zi = std::polar(1.0, -constants::two_pi * f / sample_rate);
  std::complex<double> h(1.0, 0.0);
  for (const auto& q : sos) {
    h *= (q.b0 + q.b1 * zi + q.b2 * zi * zi) / (1.0 + q.a1 * zi + q.a2 * zi * zi);
  }
  return h;
}

// Per-section transposed direct-form II state.
struct SectionState {
  double s1 = 0.0, s2 = 0.0;
};

/// Steady-state section states for a unit step input, so filtering a
/// constant signal produces no start-up transient.
inline std::vector<SectionState> sos_step_state(const SosFilter& sos) {
  std::vector<SectionState> zi(sos.size());
  double gain_in = 1.0;
  for (std::size_t i = 0; i < sos.size(); ++i) {
    const auto& q = sos[i];
    const double g = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double s2 = q.b2 - q.a2 * g;
    const double s1 = q.b1 - q.a1 * g + s2;
    zi[i] = {s1 * gain_in, s2 * gain_in};
    gain_in *= g;
  }
  return zi;
}

inline void sos_filter_inplace(const SosFilter& sos, std::span<double> x, std::vector<SectionState> state) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& q = sos[s];
    double s1 = state[s].s1, s2 = state[s].s2;
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
}

inline std::vector<double> sos_filter(const SosFilter& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  sos_filter_inplace(sos, y, std::vector<SectionState>(sos.size()));
  return y;
}

/// Forward-backward (zero-phase) filtering with odd reflection padding at both
/// ends and steady-state initial conditions. Magnitude response is |H|^2.
inline std::vector<double> filtfilt(const SosFilter& sos, std::span<const double> x, std::size_t padlen) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  padlen = std::min(padlen, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = sos_step_state(sos);
  auto scaled = [&zi](double x0) {
    auto z = zi;
    for (auto& s : z) {
      s.s1 *= x0;
      s.s2 *= x0;
    }
    return z;
  };
  sos_filter_inplace(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  sos_filter_inplace(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(padlen), ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

}  // namespace fibertap::dsp
