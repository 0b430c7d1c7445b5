#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "fibertap/io/csv.hpp"
#include "fibertap/io/trace_file.hpp"
#include "fibertap/io/wav.hpp"
#include "support.hpp"

using namespace fibertap;
using namespace fibertap::io;
namespace ts = testing_support;

namespace {

// Minimal RIFF writer independent of the library.
void put(std::vector<unsigned char>& b, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::vector<unsigned char> handmade_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                        std::uint16_t bits, const std::vector<unsigned char>& data,
                                        bool extra_chunk = false) {
  std::vector<unsigned char> b;
  auto tag = [&b](const char* t) { b.insert(b.end(), t, t + 4); };
  tag("RIFF");
  put(b, 0, 4);
  tag("WAVE");
  if (extra_chunk) {
    tag("LIST");
    put(b, 3, 4);
    b.insert(b.end(), {'a', 'b', 'c', 0});  // odd size plus pad byte
  }
  tag("fmt ");
  put(b, 16, 4);
  put(b, format, 2);
  put(b, channels, 2);
  put(b, rate, 4);
  put(b, rate * channels * bits / 8, 4);
  put(b, channels * bits / 8, 2);
  put(b, bits, 2);
  tag("data");
  put(b, static_cast<std::uint32_t>(data.size()), 4);
  b.insert(b.end(), data.begin(), data.end());
  const auto riff = static_cast<std::uint32_t>(b.size() - 8);
  for (int i = 0; i < 4; ++i) b[4 + i] = static_cast<unsigned char>((riff >> (8 * i)) & 0xffu);
  return b;
}

void dump(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Wav, ReadsHandmadePcm16) {
  ts::TempDir dir;
  std::vector<unsigned char> data;
  for (std::int16_t v : {std::int16_t{0}, std::int16_t{16384}, std::int16_t{-32768}, std::int16_t{32767}}) {
    put(data, static_cast<std::uint16_t>(v), 2);
  }
  dump(dir / "a.wav", handmade_wav(1, 1, 8000, 16, data, true));
  const auto w = read_wav(dir / "a.wav");
  EXPECT_EQ(w.sample_rate, 8000u);
  EXPECT_EQ(w.format, WavFormat::pcm16);
  ASSERT_EQ(w.samples.size(), 4u);
  EXPECT_EQ(w.samples[0], 0.0);
  EXPECT_EQ(w.samples[1], 0.5);
  EXPECT_EQ(w.samples[2], -1.0);
  EXPECT_EQ(w.samples[3], 32767.0 / 32768.0);
}

TEST(Wav, ReadsHandmadeFloat32) {
  ts::TempDir dir;
  std::vector<unsigned char> data;
  for (float f : {0.25f, -3.5f, 1e-6f}) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put(data, u, 4);
  }
  dump(dir / "f.wav", handmade_wav(3, 1, 400000, 32, data));
  const auto w = read_wav(dir / "f.wav");
  EXPECT_EQ(w.format, WavFormat::float32);
  EXPECT_EQ(w.sample_rate, 400000u);
  EXPECT_EQ(w.samples, (std::vector<double>{0.25, -3.5, static_cast<double>(1e-6f)}));
}

TEST(Wav, RejectsStereoGarbageAndMissing) {
  ts::TempDir dir;
  dump(dir / "s.wav", handmade_wav(1, 2, 8000, 16, std::vector<unsigned char>(8, 0)));
  EXPECT_THROW(read_wav(dir / "s.wav"), IoError);
  dump(dir / "g.wav", std::vector<unsigned char>(64, 'x'));
  EXPECT_THROW(read_wav(dir / "g.wav"), IoError);
  dump(dir / "u.wav", handmade_wav(1, 1, 8000, 8, std::vector<unsigned char>(8, 0)));
  EXPECT_THROW(read_wav(dir / "u.wav"), IoError);
  EXPECT_THROW(read_wav(dir / "missing.wav"), IoError);
}

TEST(Wav, Float32RoundTripIsExactInFloat) {
  ts::TempDir dir;
  const auto x = ts::white(5000, 1e-3, 1);
  write_wav(dir / "r.wav", x, 40000, WavFormat::float32);
  const auto w = read_wav(dir / "r.wav");
  ASSERT_EQ(w.samples.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(w.samples[i], static_cast<double>(static_cast<float>(x[i])));
}

TEST(Wav, Pcm16RoundTripWithinOneStep) {
  ts::TempDir dir;
  const auto x = ts::sine(4000, 16000, 440.0, 0.8);
  write_wav(dir / "p.wav", x, 16000, WavFormat::pcm16);
  const auto w = read_wav(dir / "p.wav");
  EXPECT_EQ(w.format, WavFormat::pcm16);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(w.samples[i], x[i], 0.5 / 32768.0 + 1e-12);
}

TEST(Csv, ShortestRoundTripAndErrors) {
  ts::TempDir dir;
  CsvTable t{{"a", "b"}, {{0.1, -2.5e-300}, {1.0 / 3.0, 12345678.9}}};
  write_csv(dir / "t.csv", t);
  const auto back = read_csv(dir / "t.csv");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(parse_double("2.5", "x"), 2.5);
  EXPECT_THROW(parse_double("2,5", "x"), IoError);

  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  EXPECT_THROW(read_csv(dir / "bad.csv"), IoError);
}

TEST(TraceFile, WavWithSidecarRoundTrip) {
  ts::TempDir dir;
  const SampledTrace t(TraceKind::heterodyne, 400e3, ts::white(1000, 0.3, 2));
  write_trace(dir / "h.wav", t);
  EXPECT_TRUE(std::filesystem::exists(dir / "h.wav.json"));
  const auto back = read_trace(dir / "h.wav", TraceKind::phase);
  EXPECT_EQ(back.kind(), TraceKind::heterodyne);
  EXPECT_EQ(back.sample_rate(), 400e3);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back[i], static_cast<double>(static_cast<float>(t[i])));
}

TEST(TraceFile, ScaledWav) {
  ts::TempDir dir;
  const SampledTrace t(TraceKind::phase, 40e3, ts::white(500, 1e-4, 3));
  write_trace(dir / "p.wav", t, 1000.0);
  EXPECT_NEAR(read_wav(dir / "p.wav").samples[7], 1000.0 * t[7], 1e-6);
  const auto back = read_trace(dir / "p.wav", TraceKind::phase);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(back[i], t[i], 1e-10);
}

TEST(TraceFile, CsvRoundTripIsExact) {
  ts::TempDir dir;
  const SampledTrace t(TraceKind::phase, 40e3, ts::white(2000, 0.1, 4));
  write_trace(dir / "p.csv", t);
  EXPECT_EQ(ts::slurp(dir / "p.csv").substr(0, 11), "time,phase\n");
  const auto back = read_trace(dir / "p.csv", TraceKind::heterodyne);
  EXPECT_EQ(back.kind(), TraceKind::phase);
  EXPECT_EQ(back.sample_rate(), 40e3);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back[i], t[i]);
}

TEST(TraceFile, PlainWavUsesFallbackKindAndBadExtensionFails) {
  ts::TempDir dir;
  write_wav(dir / "plain.wav", ts::sine(100, 8000, 100.0, 0.1), 8000, WavFormat::pcm16);
  EXPECT_EQ(read_trace(dir / "plain.wav", TraceKind::audio_pressure).kind(), TraceKind::audio_pressure);
  const SampledTrace t(TraceKind::phase, 8e3, std::vector<double>(10, 0.0));
  EXPECT_THROW(write_trace(dir / "x.mp3", t), IoError);
  EXPECT_THROW(read_trace(dir / "x.mp3", TraceKind::phase), IoError);
}
