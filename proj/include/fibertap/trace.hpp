#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fibertap/error.hpp"

namespace fibertap {

enum class TraceKind { audio_pressure, phase, heterodyne, baseband };

inline std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::audio_pressure: return "audio_pressure";
    case TraceKind::phase: return "phase";
    case TraceKind::heterodyne: return "heterodyne";
    case TraceKind::baseband: return "baseband";
  }
  return "unknown";
}

inline TraceKind trace_kind_from_string(std::string_view name) {
  if (name == "audio_pressure") return TraceKind::audio_pressure;
  if (name == "phase") return TraceKind::phase;
  if (name == "heterodyne") return TraceKind::heterodyne;
  if (name == "baseband") return TraceKind::baseband;
  throw IoError("unknown trace kind '" + std::string(name) + "'");
}

namespace detail {
inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const std::complex<double>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}
}  // namespace detail

/// Uniformly sampled time series. Immutable once constructed: the sample
/// rate is positive and every sample finite, otherwise construction throws.
template <typename T>
class BasicTrace {
 public:
  using value_type = T;

  BasicTrace(TraceKind kind, double sample_rate, std::vector<T> samples)
      : kind_(kind), sample_rate_(sample_rate), samples_(std::move(samples)) {
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
      throw InputError("trace: sample_rate must be positive and finite");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!detail::is_finite(samples_[i])) {
        throw InputError("trace: non-finite sample at index " + std::to_string(i));
      }
    }
  }

  TraceKind kind() const noexcept { return kind_; }
  double sample_rate() const noexcept { return sample_rate_; }
  std::span<const T> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const T& operator[](std::size_t i) const { return samples_[i]; }
  double duration() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_; }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) / sample_rate_; }

  // Moves the samples out; the trace is left empty.
  std::vector<T> take_samples() && { return std::move(samples_); }

 private:
  TraceKind kind_;
  double sample_rate_;
  std::vector<T> samples_;
};

using SampledTrace = BasicTrace<double>;
using BasebandTrace = BasicTrace<std::complex<double>>;

inline void require_kind(const SampledTrace& trace, TraceKind expected, std::string_view op) {
  if (trace.kind() != expected) {
    throw InputError(std::string(op) + ": expected " + std::string(to_string(expected)) +
                     " trace, got " + std::string(to_string(trace.kind())));
  }
}

}  // namespace fibertap
