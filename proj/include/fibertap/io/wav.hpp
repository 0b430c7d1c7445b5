#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "fibertap/error.hpp"

namespace fibertap::io {

enum class WavFormat { pcm16, float32 };

struct WavData {
  std::uint32_t sample_rate = 0;
  WavFormat format = WavFormat::float32;
  std::vector<double> samples;
};

namespace detail {

inline std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
inline void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

/// Reads a mono WAV: 16-bit PCM (scaled to [-1, 1)) or 32-bit IEEE float.
/// Multi-channel files are rejected.
inline WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " in '" + path.string() + "'";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw IoError("not a RIFF/WAVE file" + where);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = detail::le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw IoError("truncated fmt chunk" + where);
      const unsigned char* f = bytes.data() + body;
      format = detail::le16(f);
      channels = detail::le16(f + 2);
      rate = detail::le32(f + 4);
      bits = detail::le16(f + 14);
      if (format == detail::kFormatExtensible) {
        if (size < 26 || avail < 26) throw IoError("truncated extensible fmt chunk" + where);
        format = detail::le16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw IoError("missing fmt chunk" + where);
  if (data == nullptr) throw IoError("missing data chunk" + where);
  if (channels != 1) throw IoError("only mono WAV is supported, got " + std::to_string(channels) + " channels" + where);
  if (rate == 0) throw IoError("zero sample rate" + where);

  WavData out;
  out.sample_rate = rate;
  if (format == detail::kFormatPcm && bits == 16) {
    out.format = WavFormat::pcm16;
    const std::size_t n = data_size / 2;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = static_cast<std::int16_t>(detail::le16(data + 2 * i)) / 32768.0;
    }
  } else if (format == detail::kFormatFloat && bits == 32) {
    out.format = WavFormat::float32;
    const std::size_t n = data_size / 4;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t u = detail::le32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, sizeof f);
      if (!std::isfinite(f)) throw IoError("non-finite sample " + std::to_string(i) + where);
      out.samples[i] = f;
    }
  } else {
    throw IoError("unsupported WAV encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                  " bits); expected 16-bit PCM or 32-bit float" + where);
  }
  return out;
}

inline void write_wav(const std::filesystem::path& path, std::span<const double> samples, std::uint32_t sample_rate,
                      WavFormat format = WavFormat::float32) {
  const bool is_float = format == WavFormat::float32;
  const std::uint16_t bytes_per_sample = is_float ? 4 : 2;
  const auto data_size = static_cast<std::uint32_t>(samples.size() * bytes_per_sample);

  std::vector<unsigned char> out;
  out.reserve(64 + data_size);
  detail::put_tag(out, "RIFF");
  detail::put32(out, 0);  // patched below
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put32(out, is_float ? 18 : 16);
  detail::put16(out, is_float ? detail::kFormatFloat : detail::kFormatPcm);
  detail::put16(out, 1);
  detail::put32(out, sample_rate);
  detail::put32(out, sample_rate * bytes_per_sample);
  detail::put16(out, bytes_per_sample);
  detail::put16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  if (is_float) {
    detail::put16(out, 0);  // cbSize
    detail::put_tag(out, "fact");
    detail::put32(out, 4);
    detail::put32(out, static_cast<std::uint32_t>(samples.size()));
  }
  detail::put_tag(out, "data");
  detail::put32(out, data_size);
  for (double v : samples) {
    if (is_float) {
      const auto f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, sizeof u);
      detail::put32(out, u);
    } else {
      const double clipped = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      detail::put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(clipped)));
    }
  }
  const auto riff_size = static_cast<std::uint32_t>(out.size() - 8);
  for (int i = 0; i < 4; ++i) out[4 + i] = static_cast<unsigned char>((riff_size >> (8 * i)) & 0xff);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write WAV file '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace fibertap::io
