#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fibertap/fibertap.hpp"
#include "support.hpp"

using namespace fibertap;
using nlohmann::json;
namespace ts = testing_support;

namespace {

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

void write_tone(const std::filesystem::path& p, double seconds = 1.0, double rate = 16000.0, double freq = 1000.0) {
  const auto x = ts::sine(static_cast<std::size_t>(seconds * rate), rate, freq, 0.5);
  io::write_wav(p, x, static_cast<std::uint32_t>(rate), io::WavFormat::float32);
}

void write_config(const std::filesystem::path& p, const json& overlay) { io::write_json(p, overlay); }

json read(const std::filesystem::path& p) { return io::read_json(p); }

}  // namespace

TEST(Cli, SimulateDeterministicWithManifest) {
  ts::TempDir d;
  write_tone(d / "tone.wav");
  ASSERT_EQ(ts::run_cli("simulate --audio " + q(d / "tone.wav") + " --out " + q(d / "a.wav") + " --seed 7", d / "log"), 0)
      << ts::slurp(d / "log");
  ASSERT_EQ(ts::run_cli("simulate --audio " + q(d / "tone.wav") + " --out " + q(d / "b.wav") + " --seed 7", d / "log"), 0);
  ASSERT_EQ(ts::run_cli("simulate --audio " + q(d / "tone.wav") + " --out " + q(d / "c.wav") + " --seed 8", d / "log"), 0);
  EXPECT_TRUE(std::filesystem::exists(d / "a.wav"));
  EXPECT_EQ(ts::slurp(d / "a.wav"), ts::slurp(d / "b.wav"));
  EXPECT_NE(ts::slurp(d / "a.wav"), ts::slurp(d / "c.wav"));

  const auto ma = read(d / "a.wav.manifest.json");
  const auto mb = read(d / "b.wav.manifest.json");
  EXPECT_EQ(ma["config_digest"], mb["config_digest"]);
  EXPECT_EQ(ma["config_digest"], config_digest(default_config()));
  EXPECT_EQ(ma["seed"], 7);
  EXPECT_EQ(ma["tool_version"], std::string(tool_version));
  EXPECT_EQ(ma["command"], "simulate");
  EXPECT_FALSE(ma["stage_timings"].empty());
  EXPECT_EQ(read(d / "a.wav.json")["kind"], "heterodyne");
}

TEST(Cli, NyquistViolationExitsFourNamingKeys) {
  ts::TempDir d;
  write_tone(d / "tone.wav", 0.1);
  write_config(d / "cfg.json", {{"interferometer", {{"intermediate_frequency", 250e3}}}});
  const int rc = ts::run_cli("simulate --config " + q(d / "cfg.json") + " --audio " + q(d / "tone.wav") + " --out " +
                                 q(d / "h.wav"),
                             d / "log");
  EXPECT_EQ(rc, 4);
  const auto log = ts::slurp(d / "log");
  EXPECT_NE(log.find("interferometer.intermediate_frequency"), std::string::npos) << log;
  EXPECT_NE(log.find("sample_rate"), std::string::npos) << log;
}

TEST(Cli, ExitCodesForConfigAndIo) {
  ts::TempDir d;
  write_tone(d / "tone.wav", 0.1);
  write_config(d / "cfg.json", {{"laser", {{"colour", 1}}}});
  EXPECT_EQ(ts::run_cli("simulate --config " + q(d / "cfg.json") + " --audio " + q(d / "tone.wav") + " --out " +
                            q(d / "h.wav"),
                        d / "log"),
            2);
  EXPECT_NE(ts::slurp(d / "log").find("laser.colour"), std::string::npos);
  EXPECT_EQ(ts::run_cli("simulate --audio " + q(d / "missing.wav") + " --out " + q(d / "h.wav"), d / "log"), 3);
  EXPECT_EQ(ts::run_cli("simulate --audio " + q(d / "tone.wav") + " --out " + q(d / "h.flac"), d / "log"), 3);
  EXPECT_EQ(ts::run_cli("budget --sweep sideways --out " + q(d / "b.csv"), d / "log"), 2);
  EXPECT_EQ(ts::run_cli("frobnicate", d / "log"), 2);
}

TEST(Cli, ToneRoundTripThroughDemod) {
  ts::TempDir d;
  write_tone(d / "tone.wav");
  ASSERT_EQ(ts::run_cli("simulate --audio " + q(d / "tone.wav") + " --level-db 70 --out " + q(d / "h.wav"), d / "log"), 0);
  ASSERT_EQ(ts::run_cli("demod --in " + q(d / "h.wav") + " --out " + q(d / "p.wav"), d / "log"), 0) << ts::slurp(d / "log");
  const auto p = io::read_trace(d / "p.wav", TraceKind::phase);
  EXPECT_EQ(p.sample_rate(), 40e3);
  const auto c = default_config();
  const double expected = c.coupling.sensitivity * c.interferometer.sensing_length * spl_to_pressure(70.0);
  const auto fit = ts::fit_tone(p.samples(), 40e3, 1000.0, 2000, p.size() - 2000);
  EXPECT_NEAR(fit.amplitude / expected, 1.0, 0.02);
}

TEST(Cli, NoiseFreeRoundTripCorrelatesAboveHighpass) {
  ts::TempDir d;
  // Two tones, one below the 500 Hz corner.
  std::vector<double> x(16000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 0.4 * std::sin(2.0 * std::numbers::pi * 1500.0 * i / 16000.0) +
           0.3 * std::sin(2.0 * std::numbers::pi * 3100.0 * i / 16000.0 + 0.5) +
           0.3 * std::sin(2.0 * std::numbers::pi * 120.0 * i / 16000.0);
  }
  io::write_wav(d / "mix.wav", x, 16000, io::WavFormat::float32);
  write_config(d / "cfg.json", {{"simulation", {{"noise_enabled", false}, {"level_db", 70.0}}}});
  ASSERT_EQ(ts::run_cli("simulate --config " + q(d / "cfg.json") + " --audio " + q(d / "mix.wav") + " --out " + q(d / "h.wav"), d / "log"), 0);
  ASSERT_EQ(ts::run_cli("demod --in " + q(d / "h.wav") + " --out " + q(d / "p.wav"), d / "log"), 0);
  const auto p = io::read_trace(d / "p.wav", TraceKind::phase);

  // Reference: the injected phase at 40 kHz, high-passed the same way.
  const auto cfg = load_config(d / "cfg.json");
  const auto audio = prepare_audio(SampledTrace(TraceKind::audio_pressure, 16000.0, x), cfg);
  const auto phase = voice_to_phase(audio, cfg.coupling, cfg.interferometer.sensing_length);
  const auto ref = highpass(decimate_to_audio(phase, 40e3), 500.0, 4);
  ASSERT_EQ(ref.size(), p.size());
  EXPECT_GT(ts::pearson(p.samples(), ref.samples()), 0.99);
}

TEST(Cli, CarrierOnlyIsNearSilent) {
  ts::TempDir d;
  io::write_wav(d / "quiet.wav", std::vector<double>(16000, 0.0), 16000, io::WavFormat::float32);
  write_config(d / "cfg.json", {{"simulation", {{"noise_enabled", false}}}, {"interferometer", {{"initial_phase", 1.1}}}});
  ASSERT_EQ(ts::run_cli("simulate --config " + q(d / "cfg.json") + " --audio " + q(d / "quiet.wav") + " --out " + q(d / "h.wav"), d / "log"), 0);
  ASSERT_EQ(ts::run_cli("demod --in " + q(d / "h.wav") + " --out " + q(d / "p.wav"), d / "log"), 0);
  EXPECT_LT(ts::rms(io::read_wav(d / "p.wav").samples), 1e-4);

  // Without the high-pass the static phase survives.
  ASSERT_EQ(ts::run_cli("demod --no-highpass --in " + q(d / "h.wav") + " --out " + q(d / "raw.wav"), d / "log"), 0);
  const auto raw = io::read_wav(d / "raw.wav").samples;
  EXPECT_NEAR(raw[raw.size() / 2], 1.1, 1e-5);
}

TEST(Cli, EnhanceCleanInputIsIdentity) {
  ts::TempDir d;
  const SampledTrace clean(TraceKind::phase, 40e3, ts::sine(40000, 40e3, 700.0, 3e-3));
  io::write_trace(d / "clean.csv", clean);
  ASSERT_EQ(ts::run_cli("enhance --in " + q(d / "clean.csv") + " --out " + q(d / "out.csv"), d / "log"), 0) << ts::slurp(d / "log");
  const auto out = io::read_trace(d / "out.csv", TraceKind::phase);
  // A steady tone is all "silent", so its own spectrum is subtracted; the
  // zero-noise identity goes through a zero noise profile instead.
  io::write_trace(d / "zero.csv", SampledTrace(TraceKind::phase, 40e3, std::vector<double>(4000, 0.0)));
  ASSERT_EQ(ts::run_cli("enhance --in " + q(d / "clean.csv") + " --noise-profile " + q(d / "zero.csv") + " --out " + q(d / "id.csv"), d / "log"), 0);
  const auto id = io::read_trace(d / "id.csv", TraceKind::phase);
  double worst = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) worst = std::max(worst, std::abs(id[i] - clean[i]));
  EXPECT_LT(worst, 1e-10 * 3e-3);
  EXPECT_EQ(out.size(), clean.size());
}

TEST(Cli, EnhanceReportsSegmentalGainWithNoiseProfile) {
  ts::TempDir d;
  const std::size_t n = 80000;
  const auto tone = ts::sine(n, 40e3, 1000.0, std::sqrt(2.0) * 1e-3);
  const auto noise = ts::white(n, 1e-3, 31);
  std::vector<double> mix(n);
  for (std::size_t i = 0; i < n; ++i) mix[i] = tone[i] + noise[i];
  io::write_trace(d / "mix.wav", SampledTrace(TraceKind::phase, 40e3, mix));
  io::write_trace(d / "ref.wav", SampledTrace(TraceKind::phase, 40e3, tone));
  io::write_trace(d / "noise.wav", SampledTrace(TraceKind::phase, 40e3, ts::white(n, 1e-3, 32)));
  ASSERT_EQ(ts::run_cli("enhance --in " + q(d / "mix.wav") + " --noise-profile " + q(d / "noise.wav") + " --reference " +
                            q(d / "ref.wav") + " --out " + q(d / "out.wav"),
                        d / "log"),
            0)
      << ts::slurp(d / "log");
  const auto report = read(d / "out.wav.report.json");
  EXPECT_TRUE(report["used_noise_profile"].get<bool>());
  EXPECT_EQ(report["silent_frames"], 0);
  EXPECT_NEAR(report["segmental_snr_db"]["input"].get<double>(), 0.0, 0.5);
  EXPECT_GE(report["segmental_snr_db"]["gain"].get<double>(), 6.0);
  EXPECT_TRUE(std::filesystem::exists(d / "out.wav.manifest.json"));
}

TEST(Cli, BudgetLengthSweep) {
  ts::TempDir d;
  ASSERT_EQ(ts::run_cli("budget --sweep length --from 10 --to 10000 --points 31 --out " + q(d / "len.csv"), d / "log"), 0);
  const auto t = io::read_csv(d / "len.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"x_value", "thermal_rms_rad", "laser_rms_rad", "total_rms_rad", "limit_db"}));
  ASSERT_EQ(t.rows.size(), 31u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GE(t.rows[i][4], t.rows[i - 1][4]);
  EXPECT_DOUBLE_EQ(t.rows.front()[0], 10.0);
  EXPECT_DOUBLE_EQ(t.rows.back()[0], 10000.0);

  ASSERT_EQ(ts::run_cli("budget --from 3000 --to 3000 --points 1 --out " + q(d / "three.csv"), d / "log"), 0);
  EXPECT_NEAR(io::read_csv(d / "three.csv").rows.at(0)[4], 30.0, 0.5);
}

TEST(Cli, BudgetMismatchSweepSlopeAndJson) {
  ts::TempDir d;
  ASSERT_EQ(ts::run_cli("budget --sweep mismatch --from 1 --to 1000 --points 13 --out " + q(d / "m.csv"), d / "log"), 0);
  const auto t = io::read_csv(d / "m.csv");
  const double slope = std::log(t.rows.back()[2] / t.rows.front()[2]) / std::log(t.rows.back()[0] / t.rows.front()[0]);
  EXPECT_NEAR(slope, 1.0, 1e-3);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GE(t.rows[i][4], t.rows[i - 1][4]);

  ASSERT_EQ(ts::run_cli("budget --sweep mismatch --from 100 --to 100 --points 1 --format json --out " + q(d / "m.json"), d / "log"), 0);
  const auto j = read(d / "m.json");
  ASSERT_EQ(j.size(), 1u);
  EXPECT_GE(j[0]["limit_db"].get<double>(), 50.0);
  EXPECT_LE(j[0]["limit_db"].get<double>(), 70.0);
}

TEST(Cli, SensitivityTableAndSummary) {
  ts::TempDir d;
  ASSERT_EQ(ts::run_cli("sensitivity --out " + q(d / "s.csv"), d / "log"), 0) << ts::slurp(d / "log");
  const auto summary = read(d / "s.csv.summary.json");
  const auto& rows = summary["rows"];
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0]["delta_db_vs_baseline"].get<double>(), 0.0);
  EXPECT_NEAR(rows[1]["delta_db_vs_baseline"].get<double>(), -9.54, 0.01);
  EXPECT_NEAR(rows[2]["delta_db_vs_baseline"].get<double>(), -20.0, 1e-9);
  EXPECT_TRUE(summary.contains("strain_optic"));
  const auto csv = ts::slurp(d / "s.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,signal_rms_rad,delta_db_vs_baseline,beat_amplitude,carrier_delta_db");

  write_config(d / "only.json", {{"sensitivity", {{"variants", json::array()}}}});
  ASSERT_EQ(ts::run_cli("sensitivity --config " + q(d / "only.json") + " --format json --out " + q(d / "o.json"), d / "log"), 0);
  const auto only = read(d / "o.json");
  ASSERT_EQ(only.size(), 1u);
  EXPECT_EQ(only[0]["delta_db_vs_baseline"].get<double>(), 0.0);
}

TEST(Cli, SensitivityMalformedScenarioExitsTwo) {
  ts::TempDir d;
  write_config(d / "bad.json",
               {{"sensitivity", {{"variants", json::array({{{"label", "x"}, {"bulk_modulus_scale", "stiff"}}})}}}});
  EXPECT_EQ(ts::run_cli("sensitivity --config " + q(d / "bad.json") + " --out " + q(d / "s.csv"), d / "log"), 2);
  EXPECT_NE(ts::slurp(d / "log").find("sensitivity.variants[0].bulk_modulus_scale"), std::string::npos);
}

TEST(Cli, ConfigCommandMatchesShippedDefault) {
  ts::TempDir d;
  ASSERT_EQ(ts::run_cli("config --out " + q(d / "c.json"), d / "log"), 0);
  EXPECT_EQ(read(d / "c.json"), read(std::filesystem::path(FIBERTAP_SOURCE_DIR) / "config" / "default.json"));
}

// Files between stages hold float32; the in-process pipeline rounds at the
// same points, so the chained CLI and run_pipeline agree bit for bit.
TEST(Cli, ChainedCommandsEqualInProcessPipeline) {
  ts::TempDir d;
  write_tone(d / "tone.wav", 0.5);
  const std::string seed = " --seed 1234";
  ASSERT_EQ(ts::run_cli("simulate --audio " + q(d / "tone.wav") + " --level-db 70 --out " + q(d / "h.wav") + seed, d / "log"), 0);
  ASSERT_EQ(ts::run_cli("demod --in " + q(d / "h.wav") + " --out " + q(d / "p.wav"), d / "log"), 0);
  ASSERT_EQ(ts::run_cli("enhance --in " + q(d / "p.wav") + " --out " + q(d / "e.wav"), d / "log"), 0);

  auto config = default_config();
  config.simulation.level_db = 70.0;
  const auto wav = io::read_wav(d / "tone.wav");
  const SampledTrace audio(TraceKind::audio_pressure, wav.sample_rate, wav.samples);
  const auto in_process = run_pipeline(config, audio, 1234, true);

  const auto het = io::read_trace(d / "h.wav", TraceKind::heterodyne);
  const auto phase = io::read_trace(d / "p.wav", TraceKind::phase);
  const auto enhanced = io::read_trace(d / "e.wav", TraceKind::phase);
  auto same = [](const SampledTrace& a, const SampledTrace& b) {
    return a.size() == b.size() && std::equal(a.samples().begin(), a.samples().end(), b.samples().begin());
  };
  EXPECT_TRUE(same(het, in_process.heterodyne));
  EXPECT_TRUE(same(phase, in_process.phase));
  EXPECT_TRUE(same(enhanced, in_process.enhanced));
}
