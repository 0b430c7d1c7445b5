// fibertap command-line entry point: simulate, demod, enhance, budget and
// sensitivity subcommands over the header-only library.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fibertap/fibertap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
};

fibertap::RunConfig resolve_config(const Common& c) {
  return c.config_path.empty() ? fibertap::default_config() : fibertap::load_config(c.config_path);
}

fibertap::RunManifest start_manifest(const std::string& command, const Common& c, const fibertap::RunConfig& config) {
  fibertap::RunManifest m;
  m.command = command;
  m.config_digest = fibertap::config_digest(config);
  m.seed = c.seed;
  if (!c.config_path.empty()) m.inputs.push_back(c.config_path);
  return m;
}

std::vector<double> sweep_points(double from, double to, int points) {
  if (points < 1) throw fibertap::ConfigError("--points must be >= 1");
  if (!(to >= from) || !(from >= 0.0)) throw fibertap::ConfigError("sweep range needs 0 <= --from <= --to");
  std::vector<double> xs;
  if (points == 1) return {from};
  const bool log_spaced = from > 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    xs.push_back(log_spaced ? from * std::pow(to / from, t) : from + (to - from) * t);
  }
  xs.back() = to;
  return xs;
}

int cmd_simulate(const Common& c, const std::string& audio_in, std::optional<double> level_db, bool no_noise) {
  auto config = resolve_config(c);
  if (level_db) config.simulation.level_db = level_db;
  if (no_noise) config.simulation.noise_enabled = false;
  config.validate();
  auto m = start_manifest("simulate", c, config);
  m.inputs.push_back(audio_in);

  const auto audio = m.timed("read_audio", [&] {
    auto wav = fibertap::io::read_wav(audio_in);
    return fibertap::SampledTrace(fibertap::TraceKind::audio_pressure, wav.sample_rate, std::move(wav.samples));
  });
  const auto at_fs = m.timed("prepare_audio", [&] { return fibertap::prepare_audio(audio, config); });
  const auto het = m.timed("simulate", [&] { return fibertap::simulate(config, at_fs, c.seed); });
  m.timed("write", [&] { fibertap::io::write_trace(c.out, het); });
  m.outputs.push_back(c.out);
  fibertap::write_manifest(c.out, m);
  std::cout << "simulate: " << het.size() << " samples at " << het.sample_rate() << " Hz -> " << c.out << '\n';
  return 0;
}

int cmd_demod(const Common& c, const std::string& trace_in, bool no_highpass) {
  const auto config = resolve_config(c);
  auto m = start_manifest("demod", c, config);
  m.inputs.push_back(trace_in);
  const auto het = m.timed("read", [&] { return fibertap::io::read_trace(trace_in, fibertap::TraceKind::heterodyne); });
  fibertap::require_kind(het, fibertap::TraceKind::heterodyne, "demod");
  const auto audio = m.timed("demodulate", [&] { return fibertap::demodulate(het, config, !no_highpass); });
  m.timed("write", [&] { fibertap::io::write_trace(c.out, audio); });
  m.outputs.push_back(c.out);
  fibertap::write_manifest(c.out, m);
  std::cout << "demod: " << audio.size() << " samples at " << audio.sample_rate() << " Hz, RMS "
            << fibertap::rms(audio.samples()) << " rad -> " << c.out << '\n';
  return 0;
}

int cmd_enhance(const Common& c, const std::string& audio_in, const std::string& noise_profile,
                const std::string& reference, std::string report_path) {
  const auto config = resolve_config(c);
  auto m = start_manifest("enhance", c, config);
  m.inputs.push_back(audio_in);
  const auto noisy = fibertap::io::read_trace(audio_in, fibertap::TraceKind::phase);
  std::optional<fibertap::SampledTrace> profile;
  if (!noise_profile.empty()) {
    profile = fibertap::io::read_trace(noise_profile, noisy.kind());
    m.inputs.push_back(noise_profile);
  }
  const auto result = m.timed("spectral_subtract", [&] {
    return fibertap::enhance(noisy, config, profile ? &*profile : nullptr);
  });
  m.timed("write", [&] { fibertap::io::write_trace(c.out, result.output); });
  m.outputs.push_back(c.out);

  const auto params = config.enhance.resolve(noisy.sample_rate());
  json report = {{"frames", result.frames},
                 {"silent_frames", result.silent_frames},
                 {"used_noise_profile", result.used_noise_profile},
                 {"frame_length", params.frame_length},
                 {"hop", params.hop},
                 {"oversubtraction", params.oversubtraction},
                 {"spectral_floor", params.spectral_floor}};
  if (!reference.empty()) {
    const auto ref = fibertap::io::read_trace(reference, noisy.kind());
    m.inputs.push_back(reference);
    const double before = fibertap::segmental_snr(noisy, ref, params.frame_length);
    const double after = fibertap::segmental_snr(result.output, ref, params.frame_length);
    report["segmental_snr_db"] = {{"input", before}, {"output", after}, {"gain", after - before}};
  }
  if (report_path.empty()) report_path = c.out + ".report.json";
  fibertap::io::write_json(report_path, report);
  m.outputs.push_back(report_path);
  fibertap::write_manifest(c.out, m);
  std::cout << "enhance: " << result.frames << " frames, " << result.silent_frames << " silent"
            << (result.used_noise_profile ? " (noise profile supplied)" : "") << " -> " << c.out << '\n';
  return 0;
}

void write_rows(const std::string& out, const std::string& format, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json obj;
      for (std::size_t i = 0; i < header.size(); ++i) {
        obj[header[i]] = std::isfinite(r[i]) ? json(r[i]) : json(fibertap::io::format_double(r[i]));
      }
      arr.push_back(obj);
    }
    fibertap::io::write_json(out, arr);
  } else {
    fibertap::io::write_csv(out, {header, rows});
  }
}

int cmd_budget(const Common& c, const std::string& sweep, std::optional<double> from, std::optional<double> to,
               std::optional<int> points, const std::string& format) {
  const auto config = resolve_config(c);
  auto m = start_manifest("budget", c, config);
  const auto& ifo = config.interferometer;
  const int n = points.value_or(config.budget.points);
  std::vector<fibertap::BudgetRow> rows;
  m.timed("budget", [&] {
    if (sweep == "length") {
      const auto xs = sweep_points(from.value_or(config.budget.length_from), to.value_or(config.budget.length_to), n);
      rows = fibertap::detection_limit_vs_length(xs, ifo.detect_fiber, ifo.laser.wavelength, config.coupling,
                                                 ifo.sensing_length, config.band, config.budget.options);
    } else {
      const auto xs =
          sweep_points(from.value_or(config.budget.mismatch_from), to.value_or(config.budget.mismatch_to), n);
      const double floor = fibertap::thermal_rms(ifo.detect_fiber, ifo.laser.wavelength, config.band);
      rows = fibertap::detection_limit_vs_mismatch(xs, ifo.laser, ifo.detect_fiber.refractive_index,
                                                   config.coupling, ifo.sensing_length, config.band, floor,
                                                   config.budget.options);
    }
  });
  std::vector<std::vector<double>> table;
  for (const auto& r : rows) table.push_back({r.x_value, r.thermal_rms, r.laser_rms, r.total_rms, r.limit_db});
  write_rows(c.out, format, {"x_value", "thermal_rms_rad", "laser_rms_rad", "total_rms_rad", "limit_db"}, table);
  m.outputs.push_back(c.out);
  fibertap::write_manifest(c.out, m);
  std::cout << "budget (" << sweep << "): " << rows.size() << " rows -> " << c.out << '\n';
  return 0;
}

int cmd_sensitivity(const Common& c, const std::string& format) {
  const auto config = resolve_config(c);
  auto m = start_manifest("sensitivity", c, config);
  const auto& s = config.sensitivity;
  const auto rows = m.timed("compare", [&] {
    return fibertap::compare_mitigations(s.baseline, s.variants, config.coupling, s.test_level_db);
  });

  json table = json::array();
  for (const auto& r : rows) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(fibertap::io::format_double(v)); };
    table.push_back({{"label", r.label},
                     {"signal_rms_rad", r.signal_rms_rad},
                     {"delta_db_vs_baseline", num(r.delta_db_vs_baseline)},
                     {"beat_amplitude", r.beat_amplitude},
                     {"carrier_delta_db", num(r.carrier_delta_db)}});
  }
  if (format == "json") {
    fibertap::io::write_json(c.out, table);
  } else {
    std::ofstream out(c.out);
    if (!out) throw fibertap::IoError("cannot write '" + c.out + "'");
    out << "label,signal_rms_rad,delta_db_vs_baseline,beat_amplitude,carrier_delta_db\n";
    for (const auto& r : rows) {
      std::string label = r.label;
      if (label.find_first_of(",\"") != std::string::npos) {
        std::string q = "\"";
        for (char ch : label) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        label = q + "\"";
      }
      out << label << ',' << fibertap::io::format_double(r.signal_rms_rad) << ','
          << fibertap::io::format_double(r.delta_db_vs_baseline) << ','
          << fibertap::io::format_double(r.beat_amplitude) << ','
          << fibertap::io::format_double(r.carrier_delta_db) << '\n';
    }
    if (!out) throw fibertap::IoError("write failed for '" + c.out + "'");
  }
  m.outputs.push_back(c.out);

  const double rel = fibertap::relative_phase_change(s.strain, s.photoelastic);
  const auto& ifo = config.interferometer;
  json summary = {
      {"test_level_db", s.test_level_db},
      {"baseline", s.baseline.label},
      {"rows", table},
      {"strain_optic",
       {{"axial_strain", s.strain.axial_strain},
        {"radial_strain", s.strain.radial_strain},
        {"relative_phase_change", rel},
        {"sensing_length", ifo.sensing_length},
        {"absolute_phase_change_rad",
         fibertap::absolute_phase_change(rel, ifo.sensing_length, ifo.laser.wavelength, s.photoelastic.n)}}},
  };
  const std::string summary_path = c.out + ".summary.json";
  fibertap::io::write_json(summary_path, summary);
  m.outputs.push_back(summary_path);
  fibertap::write_manifest(c.out, m);
  for (const auto& r : rows) {
    std::cout << r.label << ": " << r.signal_rms_rad << " rad RMS, " << r.delta_db_vs_baseline << " dB\n";
  }
  return 0;
}

int cmd_config(const Common& c) {
  const auto config = resolve_config(c);
  const auto doc = fibertap::to_json(config);
  if (c.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    fibertap::io::write_json(c.out, doc);
  }
  std::cerr << "config digest " << fibertap::config_digest(config) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fibertap: fiber-tap acoustic eavesdropping simulator and DSP toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fibertap::tool_version));

  Common common;
  auto add_common = [&common](CLI::App* sub, bool needs_out = true) {
    sub->add_option("--config", common.config_path, "JSON configuration file (defaults built in)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Random seed");
    auto* out = sub->add_option("--out", common.out, "Output file");
    if (needs_out) out->required();
  };

  auto* simulate = app.add_subcommand("simulate", "Audio WAV -> heterodyne trace (.wav float32 or .csv)");
  add_common(simulate);
  std::string audio_in;
  std::optional<double> level_db;
  bool no_noise = false;
  simulate->add_option("--audio,audio", audio_in, "Input audio WAV (mono, PCM16 or float32)")->required();
  simulate->add_option("--level-db", level_db, "Rescale the audio to this dB SPL");
  simulate->add_flag("--no-noise", no_noise, "Disable fiber thermal and laser noise");

  auto* demod = app.add_subcommand("demod", "Heterodyne trace -> phase audio (IQ demod, unwrap, HPF, decimate)");
  add_common(demod);
  std::string trace_in;
  bool no_highpass = false;
  demod->add_option("--in,trace", trace_in, "Heterodyne trace (.wav or .csv)")->required();
  demod->add_flag("--no-highpass", no_highpass, "Skip the high-pass filter");

  auto* enhance = app.add_subcommand("enhance", "Spectral-subtraction speech enhancement");
  add_common(enhance);
  std::string enhance_in, noise_profile, reference, report;
  enhance->add_option("--in,phase", enhance_in, "Input phase trace (.wav or .csv)")->required();
  enhance->add_option("--noise-profile", noise_profile, "Noise-only recording; skips silent-frame detection")
      ->check(CLI::ExistingFile);
  enhance->add_option("--reference", reference, "Clean reference for segmental SNR in the report")
      ->check(CLI::ExistingFile);
  enhance->add_option("--report", report, "JSON report path (default <out>.report.json)");

  auto* budget = app.add_subcommand("budget", "Detection-limit table vs fiber length or arm mismatch");
  add_common(budget);
  std::string sweep = "length", budget_format = "csv";
  std::optional<double> from, to;
  std::optional<int> points;
  budget->add_option("--sweep", sweep, "length or mismatch")->check(CLI::IsMember({"length", "mismatch"}));
  budget->add_option("--from", from, "First sweep value in metres");
  budget->add_option("--to", to, "Last sweep value in metres");
  budget->add_option("--points", points, "Number of sweep points (log-spaced when --from > 0)");
  budget->add_option("--format", budget_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* sensitivity = app.add_subcommand("sensitivity", "Mitigation comparison table from the config scenarios");
  add_common(sensitivity);
  std::string sens_format = "csv";
  sensitivity->add_option("--format", sens_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* config_cmd = app.add_subcommand("config", "Print the resolved configuration as JSON");
  add_common(config_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common, audio_in, level_db, no_noise);
    if (demod->parsed()) return cmd_demod(common, trace_in, no_highpass);
    if (enhance->parsed()) return cmd_enhance(common, enhance_in, noise_profile, reference, report);
    if (budget->parsed()) return cmd_budget(common, sweep, from, to, points, budget_format);
    if (sensitivity->parsed()) return cmd_sensitivity(common, sens_format);
    if (config_cmd->parsed()) return cmd_config(common);
  } catch (const fibertap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
