#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fibertap/error.hpp"
#include "fibertap/io/csv.hpp"
#include "fibertap/io/wav.hpp"
#include "fibertap/trace.hpp"

namespace fibertap::io {

// Trace files are chosen by extension: ".wav" (float32, with a JSON sidecar
// "<file>.json" carrying kind and scale) or ".csv" ("time,<kind>" columns).

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

inline bool has_extension(const std::filesystem::path& path, std::string_view ext) {
  auto e = path.extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

inline std::string_view units_of(TraceKind kind) {
  switch (kind) {
    case TraceKind::audio_pressure: return "Pa";
    case TraceKind::phase: return "rad";
    case TraceKind::heterodyne: return "arb. intensity (E0^2 = 1)";
    case TraceKind::baseband: return "arb.";
  }
  return "";
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

/// Writes `trace`; WAV samples are value * scale with the scale recorded in
/// the sidecar so readers recover the physical values.
inline void write_trace(const std::filesystem::path& path, const SampledTrace& trace, double scale = 1.0) {
  if (has_extension(path, ".wav")) {
    const double rate = std::round(trace.sample_rate());
    if (rate != trace.sample_rate() || rate > 4294967295.0) {
      throw IoError("WAV export needs a whole-Hz sample rate, got " + format_double(trace.sample_rate()));
    }
    std::vector<double> scaled(trace.samples().begin(), trace.samples().end());
    for (double& v : scaled) v *= scale;
    write_wav(path, scaled, static_cast<std::uint32_t>(rate), WavFormat::float32);
    write_json(sidecar_path(path), {{"kind", std::string(to_string(trace.kind()))},
                                    {"units", std::string(units_of(trace.kind()))},
                                    {"sample_rate", trace.sample_rate()},
                                    {"scale", scale},
                                    {"samples", trace.size()},
                                    {"note", "physical value = sample / scale"}});
    return;
  }
  if (has_extension(path, ".csv")) {
    CsvTable t;
    t.header = {"time", std::string(to_string(trace.kind()))};
    t.rows.reserve(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) t.rows.push_back({trace.time(i), trace[i]});
    write_csv(path, t);
    return;
  }
  throw IoError("unsupported trace extension for '" + path.string() + "' (use .wav or .csv)");
}

/// Reads a trace. Kind and scale come from the WAV sidecar or CSV header
/// when present, otherwise `fallback_kind` and scale 1 apply.
inline SampledTrace read_trace(const std::filesystem::path& path, TraceKind fallback_kind) {
  if (has_extension(path, ".wav")) {
    auto wav = read_wav(path);
    TraceKind kind = fallback_kind;
    double scale = 1.0;
    if (std::filesystem::exists(sidecar_path(path))) {
      const auto meta = read_json(sidecar_path(path));
      if (meta.contains("kind")) kind = trace_kind_from_string(meta.at("kind").get<std::string>());
      if (meta.contains("scale")) scale = meta.at("scale").get<double>();
      if (!(scale > 0.0) || !std::isfinite(scale)) throw IoError("sidecar scale must be positive for '" + path.string() + "'");
    }
    if (scale != 1.0) {
      for (double& v : wav.samples) v /= scale;
    }
    return {kind, static_cast<double>(wav.sample_rate), std::move(wav.samples)};
  }
  if (has_extension(path, ".csv")) {
    const auto table = read_csv(path);
    if (table.header.size() != 2) throw IoError("trace CSV needs exactly two columns (time,value): '" + path.string() + "'");
    if (table.rows.size() < 2) throw IoError("trace CSV needs at least two rows: '" + path.string() + "'");
    TraceKind kind = fallback_kind;
    try {
      kind = trace_kind_from_string(table.header[1]);
    } catch (const IoError&) {
    }
    const double span = table.rows.back()[0] - table.rows.front()[0];
    double rate = static_cast<double>(table.rows.size() - 1) / span;
    if (!(span > 0.0)) throw IoError("trace CSV time column must increase: '" + path.string() + "'");
    // Times are printed from i/fs, so the rate is a whole number in practice.
    if (std::abs(rate - std::round(rate)) < 1e-6 * rate) rate = std::round(rate);
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (const auto& r : table.rows) values.push_back(r[1]);
    return {kind, rate, std::move(values)};
  }
  throw IoError("unsupported trace extension for '" + path.string() + "' (use .wav or .csv)");
}

}  // namespace fibertap::io
